#include "ltvsteer/riccati.hpp"

#include <algorithm>
#include <cmath>

namespace ltvsteer {

namespace {

// Gramians are quadrature output; eigenvalues this far below zero (relative)
// are noise, anything worse is a caller error.
constexpr double kGramianPsdTol = 1e-8;

void require_pair(const Matrix& h_t, const Matrix& pi0) {
  require_square(h_t, "H");
  require_square(pi0, "Pi0");
  if (h_t.rows() != pi0.rows()) {
    throw Error(ErrorCode::kInvalidArgument, "H and Pi0 differ in size");
  }
  if (!is_symmetric(h_t)) throw Error(ErrorCode::kNotSymmetric, "H is not symmetric");
}

Matrix congruence_by_root(const Matrix& h_t, const Matrix& m) {
  const Matrix h_half = spd_sqrt(h_t, kGramianPsdTol);
  return h_half * m * h_half;
}

}  // namespace

SymmetricExistence exists_symmetric(const Matrix& h_t, const Matrix& pi0, double margin) {
  require_pair(h_t, pi0);
  if (!is_symmetric(pi0)) throw Error(ErrorCode::kNotSymmetric, "Pi0 is not symmetric");
  SymmetricExistence out;
  const Matrix p = symmetrize(pi0);
  out.lambda_max = h_t.rows() == 0 ? 0.0
                                   : lambda_max_symmetric(symmetrize(congruence_by_root(h_t, p)));
  out.terminal_bound = out.lambda_max < 1.0 - margin;
  const SpectrumCheck spec = positive_spectrum_shifted_product(h_t, p, margin);
  out.min_eigenvalue = h_t.rows() == 0 ? 1.0 : spec.min_real;
  out.spectrum = h_t.rows() == 0 ? true : spec.positive;
  out.consistent = out.terminal_bound == out.spectrum;
  out.exists = out.terminal_bound && out.spectrum;
  return out;
}

SymmetricExistence exists_symmetric(const LtvSystem& sys, const Matrix& pi0, double s,
                                    double t_end, const Settings& settings, int grid) {
  const GramianReport report = ctrl_gramian(sys, s, t_end, settings);
  SymmetricExistence out = exists_symmetric(report.h, pi0, settings.strict_margin);
  grid = std::max(grid, 1);
  std::vector<double> times;
  for (int k = 1; k <= grid; ++k) times.push_back(s + (t_end - s) * k / grid);
  times.back() = t_end;
  const std::vector<Matrix> path = ctrl_gramian_path(sys, s, times, settings.ode);
  const Matrix p = symmetrize(pi0);
  out.path_checked = true;
  out.path_bound = true;
  for (const Matrix& h : path) {
    if (h.rows() == 0) continue;
    const double lmax = lambda_max_symmetric(symmetrize(congruence_by_root(h, p)));
    if (!(lmax < 1.0 - settings.strict_margin)) out.path_bound = false;
  }
  out.consistent = out.consistent && out.path_bound == out.terminal_bound;
  out.exists = out.exists && out.path_bound;
  return out;
}

bool exists_norm(const Matrix& h_t, const Matrix& pi0, double margin) {
  require_pair(h_t, pi0);
  if (h_t.rows() == 0) return true;
  return spectral_norm(congruence_by_root(h_t, pi0)) < 1.0 - margin;
}

bool exists_sympart(const Matrix& h_t, const Matrix& pi0, double margin) {
  require_pair(h_t, pi0);
  if (h_t.rows() == 0) return true;
  const Matrix s = symmetrize(congruence_by_root(h_t, pi0 + pi0.transpose()));
  return lambda_max_symmetric(s) < 2.0 - margin;
}

Matrix rde_rhs(const LtvSystem& sys, double t, const Matrix& pi) {
  const Matrix a = sys.a(t);
  const Matrix b = sys.b(t);
  const Matrix pib = pi * b;
  return -a.transpose() * pi - pi * a + pib * (b.transpose() * pi);
}

RdeSolution solve_rde(const LtvSystem& sys, const Matrix& pi0, double s, double t_end,
                      const Settings& settings, int samples) {
  const Eigen::Index n = sys.n();
  if (pi0.rows() != n || pi0.cols() != n) {
    throw Error(ErrorCode::kInvalidArgument, "Pi0 must be n x n");
  }
  require_finite(pi0, "Pi0");
  if (!(s >= 0.0 && s < t_end && t_end <= sys.horizon() * (1.0 + 1e-12))) {
    throw Error(ErrorCode::kInvalidArgument, "RDE interval must satisfy 0 <= s < t_end <= T");
  }
  samples = std::max(samples, 2);
  RdeSolution sol;
  sol.s = s;
  sol.t_end = t_end;
  sol.pi0 = pi0;
  std::vector<double> grid(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) grid[static_cast<std::size_t>(k)] = s + (t_end - s) * k / (samples - 1);
  grid.back() = t_end;

  Vector y(n * n);
  block_view(y, 0, n, n) = pi0;
  const OdeRhs rhs = [&sys, n](double t, const Vector& state, Vector& dy) {
    const auto pi = block_view(state, 0, n, n);
    const Matrix a = sys.a(t);
    const Matrix b = sys.b(t);
    const Matrix pib = pi * b;
    block_view(dy, 0, n, n).noalias() = -a.transpose() * pi - pi * a + pib * (b.transpose() * pi);
  };
  OdeHooks hooks;
  hooks.breakpoints = sys.breakpoints();
  hooks.output_times = grid;
  hooks.observer = [&sol, n](double t, const Vector& state) {
    const Matrix pi = block_view(state, 0, n, n);
    sol.times.push_back(t);
    sol.max_asymmetry = std::max(sol.max_asymmetry, (pi - pi.transpose()).norm());
    sol.samples.push_back(pi);
  };
  const double blowup = settings.blowup_norm;
  hooks.stop = [blowup](double, const Vector& state) { return !(state.norm() <= blowup); };
  const OdeResult result = integrate(rhs, s, t_end, std::move(y), settings.ode, hooks);
  switch (result.status) {
    case OdeStatus::kCompleted:
      sol.exists = true;
      break;
    case OdeStatus::kStopped:
    case OdeStatus::kStepUnderflow:
      sol.exists = false;
      sol.escape_time = result.t;
      return sol;
    case OdeStatus::kMaxSteps:
      throw Error(ErrorCode::kIntegrationFailure,
                  "RDE integration exceeded the step budget at t = " + std::to_string(result.t));
  }

  for (std::size_t k = 0; k + 1 < sol.samples.size(); ++k) {
    const double t0 = sol.times[k];
    const double t1 = sol.times[k + 1];
    const double dt = t1 - t0;
    const Matrix& p0 = sol.samples[k];
    const Matrix& p1 = sol.samples[k + 1];
    const Matrix f0 = rde_rhs(sys, t0, p0);
    const Matrix f1 = rde_rhs(sys, t1, p1);
    const Matrix pm = 0.5 * (p0 + p1) + dt / 8.0 * (f0 - f1);
    const Matrix fm = rde_rhs(sys, 0.5 * (t0 + t1), pm);
    const Matrix defect = p1 - p0 - dt / 6.0 * (f0 + 4.0 * fm + f1);
    const double scale = dt * std::max({1.0, f0.norm(), fm.norm(), f1.norm()});
    sol.collocation_residual = std::max(sol.collocation_residual, defect.norm() / scale);
  }
  return sol;
}

const char* certificate_name(ExistenceCertificate c) {
  switch (c) {
    case ExistenceCertificate::kNone: return "none";
    case ExistenceCertificate::kSymmetricSpectrum: return "symmetric_spectrum";
    case ExistenceCertificate::kNormBound: return "norm_bound";
    case ExistenceCertificate::kSymmetricPart: return "symmetric_part";
    case ExistenceCertificate::kSolved: return "solved";
  }
  return "unknown";
}

ExistenceCertificate certify_existence(const Matrix& h_t, const Matrix& pi0, double margin) {
  if (is_symmetric(pi0) && exists_symmetric(h_t, symmetrize(pi0), margin).exists) {
    return ExistenceCertificate::kSymmetricSpectrum;
  }
  if (exists_norm(h_t, pi0, margin)) return ExistenceCertificate::kNormBound;
  if (exists_sympart(h_t, pi0, margin)) return ExistenceCertificate::kSymmetricPart;
  return ExistenceCertificate::kNone;
}

Matrix stm_closed_form(const LtvSystem& sys, const Matrix& pi0, double s, double t,
                       const Settings& settings) {
  const Eigen::Index n = sys.n();
  if (pi0.rows() != n || pi0.cols() != n) {
    throw Error(ErrorCode::kInvalidArgument, "Pi0 must be n x n");
  }
  if (t == s) return Matrix::Identity(n, n);
  const GramianReport report = ctrl_gramian(sys, s, t, settings);
  if (certify_existence(report.h, pi0, settings.strict_margin) == ExistenceCertificate::kNone) {
    throw Error(ErrorCode::kExistenceNotCertified,
                "no existence test passes for this initial condition");
  }
  return report.phi_forward * (Matrix::Identity(n, n) - report.h * pi0);
}

Matrix stm_closed_form(const LtvSystem& sys, const RdeSolution& solution, double t,
                       const Settings& settings) {
  if (!solution.exists || t < solution.s || t > solution.t_end) {
    throw Error(ErrorCode::kExistenceNotCertified,
                "the RDE solution does not cover the requested interval");
  }
  const Eigen::Index n = sys.n();
  if (t == solution.s) return Matrix::Identity(n, n);
  const GramianReport report = ctrl_gramian(sys, solution.s, t, settings);
  return report.phi_forward * (Matrix::Identity(n, n) - report.h * solution.pi0);
}

}  // namespace ltvsteer
