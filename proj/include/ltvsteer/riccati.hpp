#pragma once

// The Riccati differential equation
//   Pi' = -A(t)^T Pi - Pi A(t) + Pi B(t) B(t)^T Pi
// with possibly nonsymmetric initial data: existence tests, numerical
// solution, and the closed-form transition matrix of A - B B^T Pi.

#include <vector>

#include "ltvsteer/gramian.hpp"

namespace ltvsteer {

struct SymmetricExistence {
  bool exists = false;
  // lambda_max(H^{1/2} Pi0 H^{1/2}) < 1 at the end of the interval.
  bool terminal_bound = false;
  // Every eigenvalue of I - H Pi0 is positive.
  bool spectrum = false;
  // The bound holds along a grid of H(t, s), when a system was supplied.
  bool path_checked = false;
  bool path_bound = false;
  bool consistent = false;
  double lambda_max = 0.0;
  double min_eigenvalue = 0.0;
};

// Existence test for symmetric pi0 given the terminal Gramian. The terminal
// bound and the spectral test are necessary and sufficient; they are both
// evaluated and must agree.
SymmetricExistence exists_symmetric(const Matrix& h_t, const Matrix& pi0,
                                    double margin = 1e-9);

// Same test on [s, t_end] of a system, additionally checking the bound on a
// uniform grid of `grid` interior Gramians.
SymmetricExistence exists_symmetric(const LtvSystem& sys, const Matrix& pi0, double s,
                                    double t_end, const Settings& settings = {},
                                    int grid = 32);

// ||H^{1/2} pi0 H^{1/2}||_2 < 1 - margin. Sufficient for any pi0.
bool exists_norm(const Matrix& h_t, const Matrix& pi0, double margin = 1e-9);

// lambda_max(H^{1/2} (pi0 + pi0^T) H^{1/2}) < 2 - margin. Sufficient for any pi0.
bool exists_sympart(const Matrix& h_t, const Matrix& pi0, double margin = 1e-9);

struct RdeSolution {
  double s = 0.0;
  double t_end = 0.0;
  Matrix pi0;
  std::vector<double> times;
  std::vector<Matrix> samples;
  bool exists = false;
  // First time at which ||Pi||_F crossed the blow-up threshold or the step
  // size collapsed. Only meaningful when exists is false.
  double escape_time = 0.0;
  double max_asymmetry = 0.0;
  // Largest relative Hermite-Simpson defect between consecutive samples.
  double collocation_residual = 0.0;
};

// Integrates the RDE from pi0 at s to t_end and stores `samples` uniformly
// spaced samples. Finite escape is a normal outcome (exists = false); other
// integration breakdowns raise kIntegrationFailure.
RdeSolution solve_rde(const LtvSystem& sys, const Matrix& pi0, double s, double t_end,
                      const Settings& settings = {}, int samples = 201);

// Right-hand side of the RDE.
Matrix rde_rhs(const LtvSystem& sys, double t, const Matrix& pi);

enum class ExistenceCertificate { kNone, kSymmetricSpectrum, kNormBound, kSymmetricPart, kSolved };

const char* certificate_name(ExistenceCertificate c);

// First certificate among symmetric-spectrum, norm and symmetric-part that
// holds for pi0 against h_t, or kNone.
ExistenceCertificate certify_existence(const Matrix& h_t, const Matrix& pi0,
                                       double margin = 1e-9);

// Phi_Pi(t, s) = Phi_A(t, s) (I - H(t, s) pi0). Throws kExistenceNotCertified
// unless one of the existence tests passes on [s, t].
Matrix stm_closed_form(const LtvSystem& sys, const Matrix& pi0, double s, double t,
                       const Settings& settings = {});

// Variant for a solution known to exist on [s, t] from a numerical solve.
Matrix stm_closed_form(const LtvSystem& sys, const RdeSolution& solution, double t,
                       const Settings& settings = {});

}  // namespace ltvsteer
