#include "ltvsteer/system.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ltvsteer/error.hpp"

namespace ltvsteer {

namespace {

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw Error(ErrorCode::kInvalidArgument,
                what + " has shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                    ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  require_finite(m, what.c_str());
}

}  // namespace

LtvSystem LtvSystem::constant(Matrix a, Matrix b, double horizon) {
  LtvSystem sys;
  sys.kind_ = TimeDependence::kConstant;
  sys.n_ = a.rows();
  sys.m_ = b.cols();
  sys.horizon_ = horizon;
  sys.a_ = {std::move(a)};
  sys.b_ = {std::move(b)};
  sys.validate();
  return sys;
}

LtvSystem LtvSystem::polynomial(std::vector<Matrix> a_coeffs, std::vector<Matrix> b_coeffs,
                                double horizon) {
  if (a_coeffs.empty() || b_coeffs.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "polynomial system needs at least one coefficient");
  }
  LtvSystem sys;
  sys.kind_ = TimeDependence::kPolynomial;
  sys.n_ = a_coeffs.front().rows();
  sys.m_ = b_coeffs.front().cols();
  sys.horizon_ = horizon;
  sys.a_ = std::move(a_coeffs);
  sys.b_ = std::move(b_coeffs);
  sys.validate();
  return sys;
}

LtvSystem LtvSystem::sampled(std::vector<double> times, std::vector<Matrix> a_samples,
                             std::vector<Matrix> b_samples, double horizon) {
  if (times.size() < 2 || a_samples.size() != times.size() || b_samples.size() != times.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "sampled system needs >= 2 times and one A and B sample per time");
  }
  LtvSystem sys;
  sys.kind_ = TimeDependence::kSampled;
  sys.n_ = a_samples.front().rows();
  sys.m_ = b_samples.front().cols();
  sys.horizon_ = horizon;
  sys.times_ = std::move(times);
  sys.a_ = std::move(a_samples);
  sys.b_ = std::move(b_samples);
  for (std::size_t i = 1; i + 1 < sys.times_.size(); ++i) sys.breakpoints_.push_back(sys.times_[i]);
  sys.validate();
  return sys;
}

void LtvSystem::validate() const {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
    throw Error(ErrorCode::kInvalidArgument, "horizon must be positive and finite");
  }
  if (n_ <= 0) throw Error(ErrorCode::kInvalidArgument, "state dimension must be positive");
  if (m_ <= 0) throw Error(ErrorCode::kInvalidArgument, "input dimension must be positive");
  for (std::size_t k = 0; k < a_.size(); ++k) require_shape(a_[k], n_, n_, "A[" + std::to_string(k) + "]");
  for (std::size_t k = 0; k < b_.size(); ++k) require_shape(b_[k], n_, m_, "B[" + std::to_string(k) + "]");
  if (kind_ == TimeDependence::kSampled) {
    for (std::size_t i = 0; i < times_.size(); ++i) {
      if (!std::isfinite(times_[i]) || (i > 0 && !(times_[i] > times_[i - 1]))) {
        throw Error(ErrorCode::kInvalidArgument, "sample times must be strictly increasing");
      }
    }
    if (times_.front() > 0.0 || times_.back() < horizon_) {
      throw Error(ErrorCode::kInvalidArgument, "sample grid must cover [0, horizon]");
    }
  }
}

Matrix LtvSystem::evaluate(const std::vector<Matrix>& data, double t) const {
  switch (kind_) {
    case TimeDependence::kConstant:
      return data.front();
    case TimeDependence::kPolynomial: {
      // Horner in ascending-degree storage.
      Matrix acc = data.back();
      for (std::size_t k = data.size() - 1; k-- > 0;) acc = acc * t + data[k];
      return acc;
    }
    case TimeDependence::kSampled: {
      if (t <= times_.front()) return data.front();
      if (t >= times_.back()) return data.back();
      const auto it = std::upper_bound(times_.begin(), times_.end(), t);
      const auto hi = static_cast<std::size_t>(it - times_.begin());
      const std::size_t lo = hi - 1;
      const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
      return (1.0 - w) * data[lo] + w * data[hi];
    }
  }
  return data.front();
}

Matrix LtvSystem::a(double t) const { return evaluate(a_, t); }
Matrix LtvSystem::b(double t) const { return evaluate(b_, t); }

}  // namespace ltvsteer
