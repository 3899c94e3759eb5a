#pragma once

// Adaptive embedded Runge-Kutta 4(5) integrator (Dormand-Prince) over a flat
// state vector. Matrix ODEs are integrated by mapping matrices onto
// contiguous column-major blocks of the state.

#include <cstddef>
#include <functional>
#include <span>

#include "ltvsteer/matcore.hpp"

namespace ltvsteer {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  // A step smaller than h_min_rel * max(1, |t|) counts as step underflow.
  double h_min_rel = 1e-14;
  std::size_t max_steps = 2'000'000;
};

using OdeRhs = std::function<void(double t, const Vector& y, Vector& dydt)>;

enum class OdeStatus {
  kCompleted,
  kStopped,        // the stop predicate fired
  kStepUnderflow,  // step size collapsed (finite escape or stiffness)
  kMaxSteps,
};

struct OdeResult {
  OdeStatus status = OdeStatus::kCompleted;
  double t = 0.0;
  Vector y;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

struct OdeHooks {
  // Steps never cross these times (kinks of piecewise-linear coefficients).
  std::span<const double> breakpoints;
  // Steps land exactly on these times and `observer` is invoked there. Must
  // be monotone in the direction of integration; entries equal to t0 are
  // reported with the initial state.
  std::span<const double> output_times;
  std::function<void(double, const Vector&)> observer;
  // Checked after every accepted step; returning true ends the integration
  // with kStopped.
  std::function<bool(double, const Vector&)> stop;
};

// Integrates y' = f(t, y) from t0 to t1 (t1 < t0 integrates backwards).
OdeResult integrate(const OdeRhs& f, double t0, double t1, Vector y0,
                    const OdeOptions& options, const OdeHooks& hooks = {});

// Views of a state vector as n x n matrix blocks.
inline Eigen::Map<Matrix> block_view(Vector& y, Eigen::Index block,
                                     Eigen::Index rows, Eigen::Index cols) {
  return {y.data() + block * rows * cols, rows, cols};
}
inline Eigen::Map<const Matrix> block_view(const Vector& y, Eigen::Index block,
                                           Eigen::Index rows, Eigen::Index cols) {
  return {y.data() + block * rows * cols, rows, cols};
}

}  // namespace ltvsteer
