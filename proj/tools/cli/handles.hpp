#pragma once

// RAII wrappers over the C handles plus a dense row-major matrix type used
// throughout the command-line tool.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ltvsteer/ltvsteer.h"

namespace ltvcli {

struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return v[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }
};

Mat operator*(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);

// Failure reported by the library, carrying its status.
class ApiError : public std::runtime_error {
 public:
  ApiError(ltv_status status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  ltv_status status() const { return status_; }

 private:
  ltv_status status_;
};

inline void check(ltv_status status) {
  if (status != LTV_OK) throw ApiError(status, ltv_last_error());
}

struct SystemDeleter {
  void operator()(ltv_system* p) const { ltv_system_destroy(p); }
};
struct ScheduleDeleter {
  void operator()(ltv_schedule* p) const { ltv_schedule_destroy(p); }
};
struct TrajectoryDeleter {
  void operator()(ltv_trajectory* p) const { ltv_trajectory_destroy(p); }
};

using System = std::unique_ptr<ltv_system, SystemDeleter>;
using Schedule = std::unique_ptr<ltv_schedule, ScheduleDeleter>;
using Trajectory = std::unique_ptr<ltv_trajectory, TrajectoryDeleter>;

}  // namespace ltvcli
