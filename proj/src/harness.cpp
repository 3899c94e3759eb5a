#include "ltvsteer/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ltvsteer {

namespace {

std::vector<double> output_grid(double t_end, int grid, const std::vector<double>& boundaries,
                                const std::vector<double>& extra) {
  std::vector<double> times;
  grid = std::max(grid, 2);
  for (int k = 0; k < grid; ++k) times.push_back(t_end * k / (grid - 1));
  times.back() = t_end;
  for (double b : boundaries) times.push_back(b);
  for (double e : extra) {
    if (e >= 0.0 && e <= t_end) times.push_back(e);
  }
  std::sort(times.begin(), times.end());
  const double eps = 1e-12 * std::max(1.0, t_end);
  std::vector<double> unique;
  for (double t : times) {
    if (unique.empty() || t - unique.back() > eps) {
      unique.push_back(t);
    } else if (std::find(boundaries.begin(), boundaries.end(), t) != boundaries.end()) {
      // Keep the exact boundary value when it collides with a grid point.
      unique.back() = t;
    }
  }
  return unique;
}

}  // namespace

Trajectory simulate(const LtvSystem& sys, const GainSchedule& schedule,
                    const SimulationOptions& options, const Settings& settings) {
  const Eigen::Index n = sys.n();
  const double t_end = options.t_end.value_or(sys.horizon());
  if (!(t_end > 0.0) || t_end > sys.horizon() * (1.0 + 1e-12)) {
    throw Error(ErrorCode::kInvalidArgument, "simulation end must lie in (0, T]");
  }
  const double eps = 1e-12 * std::max(1.0, t_end);
  if (options.sigma0) {
    if (options.sigma0->rows() != n || options.sigma0->cols() != n || !is_spd(*options.sigma0)) {
      throw Error(ErrorCode::kNotPositiveDefinite, "sigma0 must be an n x n SPD matrix");
    }
  }
  for (const Vector& x : options.tracers) {
    if (x.size() != n) throw Error(ErrorCode::kInvalidArgument, "tracer states must have length n");
  }

  // Segment intervals, checked to tile [0, t_end] from the left.
  struct Piece {
    double a;
    double b;
    int index;
  };
  std::vector<Piece> pieces;
  double cursor = 0.0;
  for (std::size_t i = 0; i < schedule.segments.size(); ++i) {
    const ScheduleSegment& seg = schedule.segments[i];
    if (std::abs(seg.start - cursor) > eps || !(seg.end > seg.start)) {
      throw Error(ErrorCode::kScheduleGap, "segment " + std::to_string(i + 1) + " starts at " +
                                               std::to_string(seg.start) + ", expected " +
                                               std::to_string(cursor));
    }
    if (seg.pi_start.rows() != n || seg.pi_start.cols() != n) {
      throw Error(ErrorCode::kInvalidArgument, "segment initial value must be n x n");
    }
    if (seg.end > t_end + eps) {
      throw Error(ErrorCode::kScheduleGap, "schedule extends past the simulated interval");
    }
    pieces.push_back({cursor, seg.end, static_cast<int>(i)});
    cursor = seg.end;
  }
  Trajectory traj;
  if (t_end - cursor > eps) {
    if (!options.allow_open_loop_tail) {
      throw Error(ErrorCode::kScheduleGap,
                  "schedule ends at " + std::to_string(cursor) + " before " + std::to_string(t_end));
    }
    pieces.push_back({cursor, t_end, -1});
    traj.schedule_complete = false;
  }
  pieces.back().b = t_end;

  std::vector<double> boundaries;
  for (const Piece& p : pieces) boundaries.push_back(p.a);
  boundaries.push_back(t_end);
  const std::vector<double> grid = output_grid(t_end, options.grid, boundaries, options.extra_times);

  traj.min_det = std::numeric_limits<double>::infinity();
  const auto record = [&](double t, int seg, const Matrix& phi) {
    traj.times.push_back(t);
    traj.segment.push_back(seg);
    traj.phi.push_back(phi);
    traj.min_det = std::min(traj.min_det, phi.determinant());
    if (options.sigma0) {
      const Matrix sigma = phi * (*options.sigma0) * phi.transpose();
      traj.max_sigma_asymmetry = std::max(traj.max_sigma_asymmetry, (sigma - sigma.transpose()).norm());
      traj.sigma.push_back(sigma);
    }
    if (!options.tracers.empty()) {
      std::vector<Vector> states;
      states.reserve(options.tracers.size());
      for (const Vector& x : options.tracers) states.push_back(phi * x);
      traj.tracers.push_back(std::move(states));
    }
  };

  Matrix phi = Matrix::Identity(n, n);
  record(0.0, pieces.front().index, phi);
  for (const Piece& piece : pieces) {
    std::vector<double> outputs;
    for (double t : grid) {
      if (t > piece.a + eps && t <= piece.b + eps) outputs.push_back(std::min(t, piece.b));
    }
    OdeHooks hooks;
    hooks.breakpoints = sys.breakpoints();
    hooks.output_times = outputs;
    OdeResult result;
    if (piece.index >= 0) {
      Vector y(2 * n * n);
      block_view(y, 0, n, n) = schedule.segments[static_cast<std::size_t>(piece.index)].pi_start;
      block_view(y, 1, n, n) = phi;
      const OdeRhs rhs = [&sys, n](double t, const Vector& state, Vector& dy) {
        const auto pi = block_view(state, 0, n, n);
        const auto ph = block_view(state, 1, n, n);
        const Matrix a = sys.a(t);
        const Matrix b = sys.b(t);
        const Matrix pib = pi * b;
        const Matrix btpi = b.transpose() * pi;
        block_view(dy, 0, n, n).noalias() = -a.transpose() * pi - pi * a + pib * btpi;
        const Matrix closed = a - b * btpi;
        block_view(dy, 1, n, n).noalias() = closed * ph;
      };
      hooks.observer = [&](double t, const Vector& state) {
        record(t, piece.index, block_view(state, 1, n, n));
      };
      const double blowup = settings.blowup_norm;
      hooks.stop = [blowup, n](double, const Vector& state) {
        return !(block_view(state, 0, n, n).norm() <= blowup);
      };
      result = integrate(rhs, piece.a, piece.b, std::move(y), settings.ode, hooks);
      if (result.status == OdeStatus::kCompleted) phi = block_view(result.y, 1, n, n);
    } else {
      Vector y(n * n);
      block_view(y, 0, n, n) = phi;
      const OdeRhs rhs = [&sys, n](double t, const Vector& state, Vector& dy) {
        block_view(dy, 0, n, n).noalias() = sys.a(t) * block_view(state, 0, n, n);
      };
      hooks.observer = [&](double t, const Vector& state) {
        record(t, -1, block_view(state, 0, n, n));
      };
      result = integrate(rhs, piece.a, piece.b, std::move(y), settings.ode, hooks);
      if (result.status == OdeStatus::kCompleted) phi = block_view(result.y, 0, n, n);
    }
    if (result.status != OdeStatus::kCompleted) {
      throw Error(ErrorCode::kIntegrationFailure,
                  "closed-loop simulation stopped at t = " + std::to_string(result.t));
    }
  }
  traj.phi_terminal = phi;
  traj.det_positive = traj.min_det > 0.0;
  return traj;
}

SteeringReport verify_phi(const LtvSystem& sys, const GainSchedule& schedule, const Matrix& phi_f,
                          SimulationOptions options, const Settings& settings) {
  if (phi_f.rows() != sys.n() || phi_f.cols() != sys.n()) {
    throw Error(ErrorCode::kInvalidArgument, "phi_f must be n x n");
  }
  options.allow_open_loop_tail = true;
  SteeringReport report;
  report.trajectory = simulate(sys, schedule, options, settings);
  report.target = phi_f;
  report.achieved = report.trajectory.phi_terminal;
  report.residual = (report.achieved - phi_f).norm();
  report.relative_residual = report.residual / std::max(phi_f.norm(), 1e-300);
  report.det_positive = report.trajectory.det_positive;
  report.min_det = report.trajectory.min_det;
  report.schedule_complete = report.trajectory.schedule_complete;
  return report;
}

SteeringReport verify_sigma(const LtvSystem& sys, const GainSchedule& schedule,
                            const Matrix& sigma0, const Matrix& sigma_f,
                            SimulationOptions options, const Settings& settings) {
  if (sigma_f.rows() != sys.n() || sigma_f.cols() != sys.n()) {
    throw Error(ErrorCode::kInvalidArgument, "sigma_f must be n x n");
  }
  options.sigma0 = sigma0;
  options.allow_open_loop_tail = true;
  SteeringReport report;
  report.trajectory = simulate(sys, schedule, options, settings);
  report.target = sigma_f;
  report.achieved = report.trajectory.sigma.back();
  report.residual = (report.achieved - sigma_f).norm();
  report.relative_residual = report.residual / std::max(sigma_f.norm(), 1e-300);
  report.det_positive = report.trajectory.det_positive;
  report.min_det = report.trajectory.min_det;
  report.schedule_complete = report.trajectory.schedule_complete;
  return report;
}

Matrix covariance_axes(const Matrix& sigma, double scale) {
  if (!is_symmetric(sigma)) throw Error(ErrorCode::kNotSymmetric, "covariance is not symmetric");
  const SymmetricEigen eig = symmetric_eigen(sigma);
  const Eigen::Index n = sigma.rows();
  Matrix axes(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = n - 1 - j;
    Vector v = eig.vectors.col(src);
    // Fix the sign so the largest component is positive.
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    if (v(big) < 0.0) v = -v;
    axes.col(j) = scale * std::sqrt(std::max(eig.values(src), 0.0)) * v;
  }
  return axes;
}

}  // namespace ltvsteer
