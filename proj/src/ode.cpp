#include "ltvsteer/ode.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "ltvsteer/error.hpp"

namespace ltvsteer {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double scaled_norm(const Vector& v, const Vector& y_old, const Vector& y_new,
                   const OdeOptions& opt) {
  if (v.size() == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double sc = opt.atol + opt.rtol * std::max(std::abs(y_old(i)), std::abs(y_new(i)));
    const double q = v(i) / sc;
    sum += q * q;
  }
  return std::sqrt(sum / static_cast<double>(v.size()));
}

double initial_step(const OdeRhs& f, double t0, const Vector& y0, const Vector& f0,
                    double direction, double span, const OdeOptions& opt) {
  const double d0 = scaled_norm(y0, y0, y0, opt);
  const double d1 = scaled_norm(f0, y0, y0, opt);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, span);
  const Vector y1 = y0 + direction * h0 * f0;
  Vector f1(y0.size());
  f(t0 + direction * h0, y1, f1);
  const double d2 = scaled_norm(f1 - f0, y0, y0, opt) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, span});
}

// Collects, in integration order, the interior times a step must land on.
std::vector<double> landing_times(double t0, double t1, const OdeHooks& hooks) {
  const double lo = std::min(t0, t1), hi = std::max(t0, t1);
  std::vector<double> out;
  for (double t : hooks.breakpoints)
    if (t > lo && t < hi) out.push_back(t);
  for (double t : hooks.output_times)
    if (t > lo && t < hi) out.push_back(t);
  out.push_back(t1);
  if (t1 >= t0) {
    std::sort(out.begin(), out.end());
  } else {
    std::sort(out.begin(), out.end(), std::greater<>());
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

OdeResult integrate(const OdeRhs& f, double t0, double t1, Vector y0,
                    const OdeOptions& opt, const OdeHooks& hooks) {
  OdeResult result;
  result.t = t0;
  result.y = std::move(y0);
  if (!result.y.allFinite()) {
    throw Error(ErrorCode::kIntegrationFailure, "non-finite initial state");
  }

  std::size_t next_output = 0;
  const auto emit_outputs_at = [&](double t, const Vector& y) {
    while (next_output < hooks.output_times.size() &&
           hooks.output_times[next_output] == t) {
      if (hooks.observer) hooks.observer(t, y);
      ++next_output;
    }
  };
  emit_outputs_at(t0, result.y);
  if (t1 == t0) return result;

  const double direction = t1 > t0 ? 1.0 : -1.0;
  const std::vector<double> landings = landing_times(t0, t1, hooks);
  std::size_t next_landing = 0;

  const Eigen::Index dim = result.y.size();
  Vector k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
  Vector y_stage(dim), y_new(dim), err(dim);

  double t = t0;
  Vector& y = result.y;
  f(t, y, k1);
  double h = initial_step(f, t, y, k1, direction, std::abs(t1 - t0), opt);

  while (next_landing < landings.size()) {
    if (result.accepted_steps + result.rejected_steps >= opt.max_steps) {
      result.status = OdeStatus::kMaxSteps;
      result.t = t;
      return result;
    }
    const double target = landings[next_landing];
    const double remaining = std::abs(target - t);
    bool lands = false;
    double step = h;
    if (step >= remaining * (1.0 - 1e-12)) {
      step = remaining;
      lands = true;
    }
    if (step < opt.h_min_rel * std::max(1.0, std::abs(t))) {
      result.status = OdeStatus::kStepUnderflow;
      result.t = t;
      return result;
    }
    const double hs = direction * step;

    y_stage = y + hs * (a21 * k1);
    f(t + c2 * hs, y_stage, k2);
    y_stage = y + hs * (a31 * k1 + a32 * k2);
    f(t + c3 * hs, y_stage, k3);
    y_stage = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * hs, y_stage, k4);
    y_stage = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * hs, y_stage, k5);
    y_stage = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    const double t_new = lands ? target : t + hs;
    f(t + hs, y_stage, k6);
    y_new = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(t_new, y_new, k7);
    err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err_norm = scaled_norm(err, y, y_new, opt);
    if (!std::isfinite(err_norm) || !y_new.allFinite()) err_norm = 1e10;

    if (err_norm <= 1.0) {
      ++result.accepted_steps;
      t = t_new;
      y.swap(y_new);
      k1.swap(k7);
      const double grow = err_norm == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(err_norm, -0.2));
      const double proposed = h;
      h = step * std::max(0.2, grow);
      // A step clipped to land on a target says nothing about the natural
      // step size, so keep the earlier proposal.
      if (lands && step < proposed) h = std::max(h, proposed);
      if (lands) {
        ++next_landing;
        emit_outputs_at(t, y);
      }
      if (hooks.stop && hooks.stop(t, y)) {
        result.status = OdeStatus::kStopped;
        result.t = t;
        return result;
      }
    } else {
      ++result.rejected_steps;
      h = step * std::max(0.1, 0.9 * std::pow(err_norm, -0.2));
    }
  }
  result.t = t;
  result.status = OdeStatus::kCompleted;
  return result;
}

}  // namespace ltvsteer
