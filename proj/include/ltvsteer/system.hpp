#pragma once

#include <span>
#include <vector>

#include "ltvsteer/matcore.hpp"

namespace ltvsteer {

enum class TimeDependence { kConstant, kPolynomial, kSampled };

// Coefficient pair (A(t), B(t)) of x' = A(t) x + B(t) u on [0, horizon].
//
// Polynomial systems store A(t) = sum_k A_k t^k (ascending degree). Sampled
// systems interpolate linearly between grid samples; the grid must be
// strictly increasing and cover [0, horizon].
class LtvSystem {
 public:
  static LtvSystem constant(Matrix a, Matrix b, double horizon);
  static LtvSystem polynomial(std::vector<Matrix> a_coeffs, std::vector<Matrix> b_coeffs,
                              double horizon);
  static LtvSystem sampled(std::vector<double> times, std::vector<Matrix> a_samples,
                           std::vector<Matrix> b_samples, double horizon);

  Eigen::Index n() const { return n_; }
  Eigen::Index m() const { return m_; }
  double horizon() const { return horizon_; }
  TimeDependence kind() const { return kind_; }

  Matrix a(double t) const;
  Matrix b(double t) const;

  // Interior grid nodes of sampled systems; integrators must not step across
  // them. Empty for smooth systems.
  std::span<const double> breakpoints() const { return breakpoints_; }

  const std::vector<Matrix>& a_data() const { return a_; }
  const std::vector<Matrix>& b_data() const { return b_; }
  const std::vector<double>& times() const { return times_; }

 private:
  LtvSystem() = default;
  void validate() const;
  Matrix evaluate(const std::vector<Matrix>& data, double t) const;

  Eigen::Index n_ = 0;
  Eigen::Index m_ = 0;
  double horizon_ = 0.0;
  TimeDependence kind_ = TimeDependence::kConstant;
  std::vector<Matrix> a_;
  std::vector<Matrix> b_;
  std::vector<double> times_;
  std::vector<double> breakpoints_;
};

}  // namespace ltvsteer
