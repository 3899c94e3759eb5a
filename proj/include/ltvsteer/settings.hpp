#pragma once

#include <cstdint>

#include "ltvsteer/ode.hpp"

namespace ltvsteer {

// Numerical knobs shared by the analysis and synthesis routines.
struct Settings {
  OdeOptions ode;
  // Relative rank tolerance for matrices produced by quadrature (Gramians).
  // Quadrature noise sits near ode.rtol, so this must stay well above it.
  double rank_tol = 1e-8;
  // Margin applied to the strict inequalities of the existence tests.
  double strict_margin = 1e-9;
  // Relative residual accepted from the five-factor decomposition.
  double fac_tol = 1e-8;
  // Relative tolerance of the reachable-set membership tests.
  double membership_tol = 1e-6;
  // ||Pi||_F beyond this value is reported as finite escape.
  double blowup_norm = 1e12;
  // Samples per Riccati segment stored in gain schedules.
  int schedule_samples = 201;
  std::uint64_t seed = 20240611;
};

}  // namespace ltvsteer
