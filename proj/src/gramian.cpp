#include "ltvsteer/gramian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ltvsteer {

namespace {

void require_interval(const LtvSystem& sys, double t, double t_end, bool ordered) {
  const double slack = 1e-12 * std::max(1.0, sys.horizon());
  const auto inside = [&](double s) { return s >= -slack && s <= sys.horizon() + slack; };
  if (!inside(t) || !inside(t_end) || !std::isfinite(t) || !std::isfinite(t_end)) {
    throw Error(ErrorCode::kInvalidArgument, "time outside [0, horizon]");
  }
  if (ordered && !(t < t_end)) {
    throw Error(ErrorCode::kInvalidArgument, "interval must satisfy t < t_end");
  }
}

void check_status(const OdeResult& result, const char* what) {
  if (result.status != OdeStatus::kCompleted) {
    throw Error(ErrorCode::kIntegrationFailure,
                std::string(what) + " integration stopped at t = " + std::to_string(result.t));
  }
}

struct GramianPass {
  Matrix phi_forward;
  Matrix phi_backward;
  Matrix g;
  Matrix h;
};

// Co-integrates over s in [t, t_end]:
//   Phi' = A Phi                      -> Phi_A(s, t)
//   X'   = A X + X A^T + B B^T        -> G(s, t)
//   Psi' = -Psi A                     -> Phi_A(t, s)
//   Y'   = Psi B B^T Psi^T            -> H(s, t)
GramianPass gramian_pass(const LtvSystem& sys, double t, double t_end, const OdeOptions& opt) {
  const Eigen::Index n = sys.n();
  const Eigen::Index nn = n * n;
  Vector y = Vector::Zero(4 * nn);
  block_view(y, 0, n, n).setIdentity();
  block_view(y, 2, n, n).setIdentity();
  const OdeRhs rhs = [&sys, n](double s, const Vector& state, Vector& dy) {
    const Matrix a = sys.a(s);
    const Matrix b = sys.b(s);
    const auto phi = block_view(state, 0, n, n);
    const auto x = block_view(state, 1, n, n);
    const auto psi = block_view(state, 2, n, n);
    block_view(dy, 0, n, n).noalias() = a * phi;
    Matrix ax = a * x;
    block_view(dy, 1, n, n) = ax + ax.transpose() + b * b.transpose();
    block_view(dy, 2, n, n).noalias() = -psi * a;
    const Matrix psib = psi * b;
    block_view(dy, 3, n, n).noalias() = psib * psib.transpose();
  };
  OdeHooks hooks;
  hooks.breakpoints = sys.breakpoints();
  const OdeResult result = integrate(rhs, t, t_end, std::move(y), opt, hooks);
  check_status(result, "Gramian");
  GramianPass out;
  out.phi_forward = block_view(result.y, 0, n, n);
  out.g = symmetrize(block_view(result.y, 1, n, n));
  out.phi_backward = block_view(result.y, 2, n, n);
  out.h = symmetrize(block_view(result.y, 3, n, n));
  return out;
}

Matrix range_projector(const Matrix& m, double tol) {
  const RangeSplit split = range_split(m, tol);
  const auto basis = split.range_basis();
  return basis * basis.transpose();
}

Eigen::Index segment_rank(const LtvSystem& sys, double a, double b, const Settings& settings) {
  return range_split(gramian_pass(sys, a, b, settings.ode).h, settings.rank_tol).rank;
}

Eigen::Index min_rank(const Partition& p) {
  return *std::min_element(p.segment_ranks.begin(), p.segment_ranks.end());
}

std::string describe(const Partition& p) {
  std::ostringstream os;
  os << "times [";
  for (std::size_t i = 0; i < p.times.size(); ++i) os << (i ? ", " : "") << p.times[i];
  os << "], segment ranks [";
  for (std::size_t i = 0; i < p.segment_ranks.size(); ++i) os << (i ? ", " : "") << p.segment_ranks[i];
  os << "], required rank " << p.global_rank;
  return os.str();
}

}  // namespace

Matrix stm(const LtvSystem& sys, double t_from, double t_to, const OdeOptions& options) {
  require_interval(sys, t_from, t_to, false);
  const Eigen::Index n = sys.n();
  Vector y(n * n);
  block_view(y, 0, n, n).setIdentity();
  const OdeRhs rhs = [&sys, n](double s, const Vector& state, Vector& dy) {
    block_view(dy, 0, n, n).noalias() = sys.a(s) * block_view(state, 0, n, n);
  };
  OdeHooks hooks;
  hooks.breakpoints = sys.breakpoints();
  const OdeResult result = integrate(rhs, t_from, t_to, std::move(y), options, hooks);
  check_status(result, "transition matrix");
  return block_view(result.y, 0, n, n);
}

Matrix reach_gramian(const LtvSystem& sys, double t, double t_end, const OdeOptions& options) {
  require_interval(sys, t, t_end, true);
  return gramian_pass(sys, t, t_end, options).g;
}

GramianReport ctrl_gramian(const LtvSystem& sys, double t, double t_end, const Settings& settings) {
  require_interval(sys, t, t_end, true);
  GramianPass pass = gramian_pass(sys, t, t_end, settings.ode);
  GramianReport report;
  report.t = t;
  report.t_end = t_end;
  const Matrix pulled_back = pass.phi_backward * pass.g * pass.phi_backward.transpose();
  const double h_norm = pass.h.norm();
  const double residual = (pass.h - pulled_back).norm();
  report.relation_residual = h_norm > 0.0 ? residual / h_norm : residual;
  const double limit = 100.0 * std::max(settings.ode.rtol * h_norm, settings.ode.atol);
  if (residual > limit) {
    throw Error(ErrorCode::kRelationViolation,
                "H and the pulled-back G differ by " + std::to_string(residual));
  }
  report.split = range_split(pass.h, settings.rank_tol);
  report.g = std::move(pass.g);
  report.h = std::move(pass.h);
  report.phi_forward = std::move(pass.phi_forward);
  report.phi_backward = std::move(pass.phi_backward);
  return report;
}

std::vector<Matrix> ctrl_gramian_path(const LtvSystem& sys, double t,
                                      std::span<const double> t_ends,
                                      const OdeOptions& options) {
  std::vector<Matrix> out;
  if (t_ends.empty()) return out;
  for (std::size_t i = 0; i < t_ends.size(); ++i) {
    if (!(t_ends[i] > t) || (i > 0 && !(t_ends[i] > t_ends[i - 1]))) {
      throw Error(ErrorCode::kInvalidArgument, "Gramian path times must increase past t");
    }
  }
  require_interval(sys, t, t_ends.back(), true);
  const Eigen::Index n = sys.n();
  Vector y = Vector::Zero(2 * n * n);
  block_view(y, 0, n, n).setIdentity();
  const OdeRhs rhs = [&sys, n](double s, const Vector& state, Vector& dy) {
    const auto psi = block_view(state, 0, n, n);
    block_view(dy, 0, n, n).noalias() = -psi * sys.a(s);
    const Matrix psib = psi * sys.b(s);
    block_view(dy, 1, n, n).noalias() = psib * psib.transpose();
  };
  OdeHooks hooks;
  hooks.breakpoints = sys.breakpoints();
  hooks.output_times = t_ends;
  hooks.observer = [&out, n](double, const Vector& state) {
    out.push_back(symmetrize(block_view(state, 1, n, n)));
  };
  const OdeResult result = integrate(rhs, t, t_ends.back(), std::move(y), options, hooks);
  check_status(result, "Gramian");
  return out;
}

Partition evaluate_partition(const LtvSystem& sys, const std::array<double, 6>& times,
                             const Settings& settings) {
  if (times.front() != 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "partition must start at 0");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "partition times must be strictly increasing");
    }
  }
  const double t_end = times.back();
  Partition p;
  p.times = times;
  const GramianReport whole = ctrl_gramian(sys, 0.0, t_end, settings);
  p.global_rank = whole.split.rank;
  const Matrix global_projector = whole.split.range_basis() * whole.split.range_basis().transpose();
  p.certified = true;
  for (std::size_t i = 0; i < 5; ++i) {
    p.segments[i] = ctrl_gramian(sys, times[i], times[i + 1], settings);
    p.segment_ranks[i] = p.segments[i].split.rank;
    if (p.segment_ranks[i] != p.global_rank) p.certified = false;
    const Matrix back = stm(sys, times[i], 0.0, settings.ode);
    const Matrix pulled = symmetrize(back * p.segments[i].h * back.transpose());
    const double diff = (range_projector(pulled, settings.rank_tol) - global_projector).norm();
    p.range_residual = std::max(p.range_residual, diff);
  }
  if (p.range_residual > 1e-6) p.certified = false;
  return p;
}

Partition find_partition(const LtvSystem& sys, double t_end, const Settings& settings) {
  if (!(t_end > 0.0)) throw Error(ErrorCode::kInvalidArgument, "t_end must be positive");
  std::array<double, 6> uniform{};
  for (std::size_t i = 0; i < 6; ++i) uniform[i] = t_end * static_cast<double>(i) / 5.0;
  Partition best = evaluate_partition(sys, uniform, settings);
  if (best.certified) return best;

  const Eigen::Index r = best.global_rank;
  for (int depth = 3; depth <= 6; ++depth) {
    const int cells = 1 << depth;
    const auto grid = [&](int k) { return t_end * static_cast<double>(k) / cells; };
    std::array<int, 6> ks{0, 0, 0, 0, 0, cells};
    bool ok = true;
    for (std::size_t i = 1; i <= 4 && ok; ++i) {
      ok = false;
      for (int k = ks[i - 1] + 1; k <= cells - static_cast<int>(5 - i); ++k) {
        if (segment_rank(sys, grid(ks[i - 1]), grid(k), settings) == r) {
          ks[i] = k;
          ok = true;
          break;
        }
      }
      if (!ok) {
        // Spread the unresolved times evenly for the best-candidate report.
        for (std::size_t j = i; j <= 4; ++j) {
          ks[j] = ks[j - 1] + std::max(1, (cells - ks[i - 1]) / static_cast<int>(6 - i));
          ks[j] = std::min(ks[j], cells - static_cast<int>(5 - j));
        }
      }
    }
    std::array<double, 6> times{};
    for (std::size_t i = 0; i < 6; ++i) times[i] = grid(ks[i]);
    bool increasing = true;
    for (std::size_t i = 1; i < 6; ++i) increasing = increasing && times[i] > times[i - 1];
    if (!increasing) continue;
    Partition candidate = evaluate_partition(sys, times, settings);
    if (candidate.certified) return candidate;
    if (min_rank(candidate) > min_rank(best)) best = std::move(candidate);
  }
  throw PartitionNotFound("no partition certifies the rank condition; best candidate: " +
                              describe(best),
                          std::move(best));
}

}  // namespace ltvsteer
