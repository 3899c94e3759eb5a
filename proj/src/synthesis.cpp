#include "ltvsteer/synthesis.hpp"

#include <algorithm>
#include <cmath>

namespace ltvsteer {

namespace {

void require_target(const LtvSystem& sys, double t_end, const Matrix& m, const char* what) {
  if (!(t_end > 0.0) || t_end > sys.horizon() * (1.0 + 1e-12)) {
    throw Error(ErrorCode::kInvalidArgument, "horizon must lie in (0, T]");
  }
  if (m.rows() != sys.n() || m.cols() != sys.n()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " must be n x n");
  }
  require_finite(m, what);
}

void require_spd(const Matrix& m, const char* what) {
  if (!is_symmetric(m)) throw Error(ErrorCode::kNotSymmetric, std::string(what) + " is not symmetric");
  if (!is_spd(m)) {
    throw Error(ErrorCode::kNotPositiveDefinite, std::string(what) + " is not positive definite");
  }
}

Matrix spd_inverse(const Matrix& m) {
  const Eigen::Index n = m.rows();
  return symmetrize(symmetrize(m).llt().solve(Matrix::Identity(n, n)));
}

// U * [[a, b], [b^T, 0]] * U^T.
Matrix symmetric_completion(const Matrix& u, const Matrix& a, const Matrix& b) {
  const Eigen::Index n = u.rows();
  const Eigen::Index r = a.rows();
  Matrix hat = Matrix::Zero(n, n);
  hat.topLeftCorner(r, r) = symmetrize(a);
  hat.topRightCorner(r, n - r) = b;
  hat.bottomLeftCorner(n - r, r) = b.transpose();
  return symmetrize(u * hat * u.transpose());
}

}  // namespace

const char* construction_name(Construction c) {
  switch (c) {
    case Construction::kSingleRdeSymmetric: return "single_rde_symmetric";
    case Construction::kSingleRdeNorm: return "single_rde_norm";
    case Construction::kSingleRdeSymmetricPart: return "single_rde_symmetric_part";
    case Construction::kFiveSegmentFullRank: return "five_segment_full_rank";
    case Construction::kFiveSegmentReduced: return "five_segment_reduced";
    case Construction::kCovarianceGeneral: return "covariance_general";
    case Construction::kCovarianceControllable: return "covariance_controllable";
    case Construction::kExternal: return "external";
  }
  return "unknown";
}

GainSchedule build_schedule(const LtvSystem& sys, const std::vector<double>& starts,
                            const std::vector<double>& ends, const std::vector<Matrix>& pis,
                            Construction construction, const Settings& settings) {
  if (starts.size() != ends.size() || starts.size() != pis.size()) {
    throw Error(ErrorCode::kInvalidArgument, "segment starts, ends and initial values differ in count");
  }
  GainSchedule schedule;
  schedule.construction = construction;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const RdeSolution sol = solve_rde(sys, pis[i], starts[i], ends[i], settings,
                                      settings.schedule_samples);
    if (!sol.exists) {
      throw Error(ErrorCode::kRdeEscape, "Riccati segment " + std::to_string(i + 1) +
                                             " escapes at t = " + std::to_string(sol.escape_time));
    }
    ScheduleSegment seg;
    seg.start = starts[i];
    seg.end = ends[i];
    seg.pi_start = pis[i];
    seg.times = sol.times;
    seg.pi = sol.samples;
    seg.collocation_residual = sol.collocation_residual;
    seg.k.reserve(seg.pi.size());
    for (std::size_t j = 0; j < seg.pi.size(); ++j) {
      seg.k.push_back(-sys.b(seg.times[j]).transpose() * seg.pi[j]);
    }
    schedule.segments.push_back(std::move(seg));
  }
  return schedule;
}

PhiMembership membership_phi(const LtvSystem& sys, double t_end, const Matrix& phi_f,
                             const Settings& settings) {
  require_target(sys, t_end, phi_f, "phi_f");
  if (!(phi_f.determinant() > 0.0)) {
    throw Error(ErrorCode::kNotPositiveDeterminant, "phi_f must have positive determinant");
  }
  const GramianReport gr = ctrl_gramian(sys, 0.0, t_end, settings);
  const Eigen::Index n = sys.n();
  PhiMembership out;
  out.split = gr.split;
  out.rank = gr.split.rank;
  const Eigen::Index r = out.rank;
  out.relative = gr.phi_backward * phi_f;
  out.w = out.split.u.transpose() * out.relative * out.split.u;
  out.bar_phi = out.w.topLeftCorner(r, r);
  out.tilde_phi = out.w.topRightCorner(r, n - r);
  out.det_bar_phi = r == 0 ? 1.0 : out.bar_phi.determinant();
  out.lower_left = out.w.bottomLeftCorner(n - r, r).norm();
  out.lower_right = (out.w.bottomRightCorner(n - r, n - r) - Matrix::Identity(n - r, n - r)).norm();
  out.tolerance = settings.membership_tol * std::max(1.0, out.relative.norm());
  out.member = out.lower_left <= out.tolerance && out.lower_right <= out.tolerance &&
               out.det_bar_phi > 0.0;

  const auto range = out.split.range_basis();
  const Matrix p = range * range.transpose();
  const Matrix q = Matrix::Identity(n, n) - p;
  const double invariance = (q * out.relative * p).norm();
  const double quotient = (q * (out.relative - Matrix::Identity(n, n)) * q).norm();
  const double orientation = r == 0 ? 1.0 : (range.transpose() * out.relative * range).determinant();
  out.geometric_member = invariance <= out.tolerance && quotient <= out.tolerance && orientation > 0.0;
  return out;
}

SigmaMembership membership_sigma(const LtvSystem& sys, double t_end, const Matrix& sigma0,
                                 const Matrix& sigma_f, const Settings& settings) {
  require_target(sys, t_end, sigma0, "sigma0");
  require_target(sys, t_end, sigma_f, "sigma_f");
  require_spd(sigma0, "sigma0");
  require_spd(sigma_f, "sigma_f");
  const GramianReport gr = ctrl_gramian(sys, 0.0, t_end, settings);
  SigmaMembership out;
  out.rank = gr.split.rank;
  out.p_g = kernel_projection(gr.g, settings.rank_tol);
  out.p_h = kernel_projection(gr.h, settings.rank_tol);
  const Matrix q = gr.phi_forward * sigma0 * gr.phi_forward.transpose();
  out.projected_residual = (out.p_g * (sigma_f - q) * out.p_g).norm();
  out.tolerance = settings.membership_tol * std::max({1.0, sigma_f.norm(), q.norm()});
  out.member = out.projected_residual <= out.tolerance;
  const Matrix pulled = gr.phi_backward * sigma_f * gr.phi_backward.transpose();
  out.pulled_back_residual = (out.p_h * (pulled - sigma0) * out.p_h).norm();
  out.pulled_back_tolerance = settings.membership_tol * std::max({1.0, pulled.norm(), sigma0.norm()});
  out.pulled_back_member = out.pulled_back_residual <= out.pulled_back_tolerance;
  return out;
}

PhiSynthesis synth_phi_single_rde(const LtvSystem& sys, double t_end, const Matrix& phi_f,
                                  const Settings& settings) {
  PhiSynthesis out;
  out.membership = membership_phi(sys, t_end, phi_f, settings);
  const PhiMembership& mem = out.membership;
  if (!mem.member) throw Error(ErrorCode::kInfeasibleTarget, "phi_f is not reachable");
  const Eigen::Index n = sys.n();
  const Eigen::Index r = mem.rank;
  const GramianReport gr = ctrl_gramian(sys, 0.0, t_end, settings);
  const Matrix& h = gr.h;
  const Matrix identity = Matrix::Identity(n, n);
  const double margin = settings.strict_margin;

  // Symmetric certificate: (H^+)^{1/2} X H^{1/2} symmetric and spec(bar_phi) > 0.
  const Matrix h_pinv = pinv(h, settings.rank_tol);
  const Matrix sym_test = spd_sqrt(h_pinv, settings.rank_tol) * mem.relative * spd_sqrt(h, 1e-8);
  const bool symmetric_form = is_symmetric(sym_test, 1e-8);
  const bool positive_bar = r == 0 || positive_spectrum(mem.bar_phi, margin).positive;
  Matrix pi0;
  Construction construction;
  if (symmetric_form && positive_bar) {
    const Matrix bar_h_inv = spd_inverse(mem.split.bar_h);
    const Matrix bar_pi = bar_h_inv * (Matrix::Identity(r, r) - mem.bar_phi);
    const Matrix tilde_pi = -bar_h_inv * mem.tilde_phi;
    pi0 = symmetric_completion(mem.split.u, bar_pi, tilde_pi);
    if (!exists_symmetric(h, pi0, margin).exists) {
      throw Error(ErrorCode::kNoCertificateApplies, "symmetric initial value fails the spectral test");
    }
    construction = Construction::kSingleRdeSymmetric;
  } else {
    pi0 = h_pinv * (identity - mem.relative);
    if (exists_norm(h, pi0, margin)) {
      construction = Construction::kSingleRdeNorm;
    } else if (exists_sympart(h, pi0, margin)) {
      construction = Construction::kSingleRdeSymmetricPart;
    } else {
      throw Error(ErrorCode::kNoCertificateApplies,
                  "no single-segment existence certificate holds for this target");
    }
  }
  out.pi_initial = {pi0};
  out.schedule = build_schedule(sys, {0.0}, {t_end}, {pi0}, construction, settings);
  return out;
}

PhiSynthesis synth_phi_five_segment(const LtvSystem& sys, double t_end, const Matrix& phi_f,
                                    const std::optional<Partition>& partition,
                                    const Settings& settings, bool force_reduced) {
  PhiSynthesis out;
  out.membership = membership_phi(sys, t_end, phi_f, settings);
  const PhiMembership& mem = out.membership;
  if (!mem.member) throw Error(ErrorCode::kInfeasibleTarget, "phi_f is not reachable");
  Partition part;
  if (partition) {
    part = *partition;
    if (!part.certified || part.times.back() != t_end) {
      throw Error(ErrorCode::kAssumptionViolated,
                  "the supplied partition does not certify the segment rank condition");
    }
  } else {
    part = find_partition(sys, t_end, settings);
  }
  out.partition = part;
  const Eigen::Index n = sys.n();
  const Eigen::Index r = mem.rank;
  FactorOptions fopt;
  fopt.fac_tol = settings.fac_tol;
  fopt.seed = settings.seed;

  std::vector<Matrix> pis(5);
  if (r == n && !force_reduced) {
    std::array<Matrix, 5> h_half;
    std::array<Matrix, 5> h_inv_half;
    for (std::size_t i = 0; i < 5; ++i) {
      h_half[i] = spd_sqrt(part.segments[i].h);
      h_inv_half[i] = spd_inv_sqrt(part.segments[i].h);
    }
    std::array<Matrix, 4> m;
    for (std::size_t i = 1; i <= 4; ++i) {
      m[i - 1] = h_inv_half[i] * part.segments[i - 1].phi_forward * h_half[i - 1];
    }
    const Matrix m5 = part.segments[4].phi_forward * h_half[4];
    const Matrix target = m5.partialPivLu().solve(phi_f) * h_half[0];
    const InterleavedFactor fac = interleaved5(target, m, fopt);
    out.factors = fac.q;
    out.factor_residual = fac.relative_residual;
    const Matrix identity = Matrix::Identity(n, n);
    for (std::size_t i = 0; i < 5; ++i) {
      pis[i] = symmetrize(h_inv_half[i] * (identity - fac.q[i]) * h_inv_half[i]);
    }
    out.schedule.construction = Construction::kFiveSegmentFullRank;
  } else {
    const Matrix& u = mem.split.u;
    const auto ur = mem.split.range_basis();
    std::array<Matrix, 5> back;
    std::array<Matrix, 5> bar_h;
    for (std::size_t i = 0; i < 5; ++i) {
      back[i] = stm(sys, part.times[i], 0.0, settings.ode);
      bar_h[i] = symmetrize(ur.transpose() * back[i] * part.segments[i].h * back[i].transpose() * ur);
    }
    std::array<Matrix, 5> bar_pi;
    Matrix tilde_pi5 = Matrix::Zero(r, n - r);
    if (r > 0) {
      std::array<Matrix, 5> half;
      std::array<Matrix, 5> inv_half;
      for (std::size_t i = 0; i < 5; ++i) {
        if (!is_spd(bar_h[i])) {
          throw Error(ErrorCode::kAssumptionViolated,
                      "segment Gramian is singular on the range of H(T,0)");
        }
        half[i] = spd_sqrt(bar_h[i]);
        inv_half[i] = spd_inv_sqrt(bar_h[i]);
      }
      std::array<Matrix, 4> m;
      for (std::size_t i = 1; i <= 4; ++i) m[i - 1] = inv_half[i] * half[i - 1];
      const Matrix target = inv_half[4] * mem.bar_phi * half[0];
      const InterleavedFactor fac = interleaved5(target, m, fopt);
      const Matrix ir = Matrix::Identity(r, r);
      for (std::size_t i = 0; i < 5; ++i) {
        out.factors[i] = fac.q[i];
        bar_pi[i] = symmetrize(inv_half[i] * (ir - fac.q[i]) * inv_half[i]);
      }
      out.factor_residual = fac.relative_residual;
      tilde_pi5 = -spd_inverse(bar_h[4]) * mem.tilde_phi;
    } else {
      for (auto& p : bar_pi) p = Matrix(0, 0);
    }
    for (std::size_t i = 0; i < 5; ++i) {
      const Matrix tilde = i == 4 ? tilde_pi5 : Matrix::Zero(r, n - r);
      pis[i] = symmetrize(back[i].transpose() * symmetric_completion(u, bar_pi[i], tilde) * back[i]);
    }
    out.schedule.construction = Construction::kFiveSegmentReduced;
  }
  const std::vector<double> starts(part.times.begin(), part.times.begin() + 5);
  const std::vector<double> ends(part.times.begin() + 1, part.times.end());
  out.pi_initial = pis;
  out.schedule = build_schedule(sys, starts, ends, pis, out.schedule.construction, settings);
  return out;
}

PhiSynthesis synth_phi(const LtvSystem& sys, double t_end, const Matrix& phi_f, PhiMethod method,
                       const std::optional<Partition>& partition, const Settings& settings) {
  switch (method) {
    case PhiMethod::kSingleRde:
      return synth_phi_single_rde(sys, t_end, phi_f, settings);
    case PhiMethod::kFiveSegment:
      return synth_phi_five_segment(sys, t_end, phi_f, partition, settings);
    case PhiMethod::kAuto:
      break;
  }
  try {
    return synth_phi_single_rde(sys, t_end, phi_f, settings);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoCertificateApplies) throw;
  }
  return synth_phi_five_segment(sys, t_end, phi_f, partition, settings);
}

CovarianceLift covariance_lift(const Matrix& n_mat, const Matrix& q, const Matrix& w,
                               double rank_tol) {
  require_square(n_mat, "N");
  require_spd(q, "Q");
  require_spd(w, "W");
  const Eigen::Index n = n_mat.rows();
  if (q.rows() != n || w.rows() != n) throw Error(ErrorCode::kInvalidArgument, "N, Q, W differ in size");
  const RangeSplit split = range_split(symmetrize(n_mat), rank_tol);
  const Eigen::Index r = split.rank;
  const Eigen::Index k = n - r;
  const Matrix& v = split.u;
  const Matrix qh = symmetrize(v.transpose() * q * v);
  const Matrix wh = symmetrize(v.transpose() * w * v);
  CovarianceLift out;
  out.rank = r;
  Matrix yh = Matrix::Zero(n, n);
  if (r > 0) {
    const Matrix q1 = qh.topLeftCorner(r, r);
    const Matrix q2 = qh.topRightCorner(r, k);
    const Matrix w1 = wh.topLeftCorner(r, r);
    const Matrix w2 = wh.topRightCorner(r, k);
    Matrix theta = q1;
    Matrix xi = w1;
    Matrix q4_inv = Matrix(0, 0);
    if (k > 0) {
      q4_inv = spd_inverse(qh.bottomRightCorner(k, k));
      theta = symmetrize(q1 - q2 * q4_inv * q2.transpose());
      xi = symmetrize(w1 - w2 * spd_inverse(wh.bottomRightCorner(k, k)) * w2.transpose());
    }
    const Matrix& n1 = split.bar_h;
    const Matrix n1_ih = spd_inv_sqrt(n1);
    const Matrix m1 = spd_geometric_solve(symmetrize(n1_ih * xi * n1_ih),
                                          symmetrize(n1_ih * theta * n1_ih));
    const Matrix ir = Matrix::Identity(r, r);
    const Matrix y1 = symmetrize(n1_ih * (m1 - ir) * n1_ih);
    yh.topLeftCorner(r, r) = y1;
    if (k > 0) {
      const Matrix y2 = spd_inverse(n1) * (w2 - (ir + n1 * y1) * q2) * q4_inv;
      yh.topRightCorner(r, k) = y2;
      yh.bottomLeftCorner(k, r) = y2.transpose();
    }
  }
  out.y = symmetrize(v * yh * v.transpose());
  const Matrix id = Matrix::Identity(n, n);
  const Matrix nm = symmetrize(n_mat);
  const Matrix rebuilt = (id + nm * out.y) * q * (id + out.y * nm);
  out.reconstruction_residual = (rebuilt - w).norm() / w.norm();
  const Matrix nh = psd_sqrt_clamped(nm);
  out.min_eigenvalue = lambda_min_symmetric(symmetrize(id + nh * out.y * nh));
  return out;
}

SigmaSynthesis synth_sigma(const LtvSystem& sys, double t_end, const Matrix& sigma0,
                           const Matrix& sigma_f, const Settings& settings) {
  SigmaSynthesis out;
  out.membership = membership_sigma(sys, t_end, sigma0, sigma_f, settings);
  if (!out.membership.member) {
    throw Error(ErrorCode::kInfeasibleTarget, "sigma_f is not reachable from sigma0");
  }
  const GramianReport gr = ctrl_gramian(sys, 0.0, t_end, settings);
  const Matrix& phi = gr.phi_forward;
  const Matrix q = symmetrize(phi * sigma0 * phi.transpose());
  out.lift = covariance_lift(gr.g, q, symmetrize(sigma_f), settings.rank_tol);
  out.pi0 = symmetrize(-phi.transpose() * out.lift.y * phi);
  out.schedule = build_schedule(sys, {0.0}, {t_end}, {out.pi0}, Construction::kCovarianceGeneral,
                                settings);
  return out;
}

SigmaSynthesis synth_sigma_controllable(const LtvSystem& sys, double t_end, const Matrix& sigma0,
                                        const Matrix& sigma_f, const Settings& settings) {
  require_target(sys, t_end, sigma0, "sigma0");
  require_target(sys, t_end, sigma_f, "sigma_f");
  require_spd(sigma0, "sigma0");
  require_spd(sigma_f, "sigma_f");
  const GramianReport gr = ctrl_gramian(sys, 0.0, t_end, settings);
  const Eigen::Index n = sys.n();
  if (gr.split.rank != n || !is_spd(gr.h, settings.rank_tol)) {
    throw Error(ErrorCode::kNotControllable, "H(T,0) is singular");
  }
  SigmaSynthesis out;
  out.membership = membership_sigma(sys, t_end, sigma0, sigma_f, settings);
  const Matrix h_inv = spd_inverse(gr.h);
  const Matrix& phi_inv = gr.phi_backward;
  const Matrix s_half = spd_sqrt(sigma0);
  const Matrix s_inv_half = spd_inv_sqrt(sigma0);
  const Matrix inner =
      symmetrize(s_half * h_inv * phi_inv * sigma_f * phi_inv.transpose() * h_inv * s_half);
  out.pi0 = symmetrize(h_inv - s_inv_half * spd_sqrt(inner) * s_inv_half);
  out.schedule = build_schedule(sys, {0.0}, {t_end}, {out.pi0},
                                Construction::kCovarianceControllable, settings);
  return out;
}

}  // namespace ltvsteer
