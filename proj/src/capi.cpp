#include "ltvsteer/ltvsteer.h"

#include <exception>
#include <new>
#include <string>

#include "ltvsteer/harness.hpp"
#include "ltvsteer/synthesis.hpp"

using ltvsteer::Error;
using ltvsteer::ErrorCode;
using ltvsteer::LtvSystem;
using ltvsteer::Matrix;
using ltvsteer::Settings;

struct ltv_system {
  LtvSystem sys;
};

struct ltv_schedule {
  ltvsteer::GainSchedule schedule;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  ltv_schedule_info info{};
};

struct ltv_trajectory {
  ltvsteer::Trajectory traj;
  Eigen::Index n = 0;
};

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

thread_local std::string g_last_error;

Matrix read(const double* data, Eigen::Index rows, Eigen::Index cols) {
  if (data == nullptr && rows * cols > 0) {
    throw Error(ErrorCode::kInvalidArgument, "null matrix pointer");
  }
  return Eigen::Map<const RowMajor>(data, rows, cols);
}

void write(const Matrix& m, double* out) {
  if (out == nullptr) return;
  Eigen::Map<RowMajor>(out, m.rows(), m.cols()) = m;
}

Settings to_settings(const ltv_options* o) {
  Settings s;
  if (o == nullptr) return s;
  s.ode.rtol = o->quad_rtol;
  s.ode.atol = o->quad_atol;
  s.rank_tol = o->rank_tol;
  s.strict_margin = o->strict_margin;
  s.fac_tol = o->fac_tol;
  s.membership_tol = o->membership_tol;
  s.blowup_norm = o->blowup_norm;
  s.schedule_samples = o->schedule_samples;
  s.seed = o->seed;
  if (!(s.ode.rtol > 0.0) || !(s.ode.atol > 0.0) || !(s.rank_tol > 0.0) || !(s.fac_tol > 0.0) ||
      !(s.membership_tol > 0.0) || !(s.strict_margin >= 0.0) || !(s.blowup_norm > 0.0) ||
      s.schedule_samples < 2) {
    throw Error(ErrorCode::kInvalidArgument, "invalid options");
  }
  return s;
}

ltvsteer::SimulationOptions to_sim(const ltv_sim_options* o, Eigen::Index n) {
  ltvsteer::SimulationOptions s;
  if (o == nullptr) return s;
  if (o->grid > 0) s.grid = o->grid;
  if (o->extra_count > 0) {
    if (o->extra_times == nullptr) throw Error(ErrorCode::kInvalidArgument, "null extra_times");
    s.extra_times.assign(o->extra_times, o->extra_times + o->extra_count);
  }
  if (o->sigma0 != nullptr) s.sigma0 = read(o->sigma0, n, n);
  if (o->tracer_count > 0) {
    if (o->tracers == nullptr) throw Error(ErrorCode::kInvalidArgument, "null tracers");
    for (std::size_t i = 0; i < o->tracer_count; ++i) {
      s.tracers.push_back(Eigen::Map<const ltvsteer::Vector>(o->tracers + i * n, n));
    }
  }
  s.allow_open_loop_tail = o->allow_open_loop_tail != 0;
  if (o->t_end > 0.0) s.t_end = o->t_end;
  return s;
}

void fill_partition(const ltvsteer::Partition& p, ltv_partition* out) {
  if (out == nullptr) return;
  for (int i = 0; i < 6; ++i) out->times[i] = p.times[i];
  for (int i = 0; i < 5; ++i) out->segment_ranks[i] = static_cast<size_t>(p.segment_ranks[i]);
  out->global_rank = static_cast<size_t>(p.global_rank);
  out->range_residual = p.range_residual;
  out->certified = p.certified ? 1 : 0;
}

double max_collocation(const ltvsteer::GainSchedule& s) {
  double r = 0.0;
  for (const auto& seg : s.segments) r = std::max(r, seg.collocation_residual);
  return r;
}

ltv_schedule* wrap(ltvsteer::GainSchedule schedule, const LtvSystem& sys) {
  auto* h = new ltv_schedule;
  h->schedule = std::move(schedule);
  h->n = sys.n();
  h->m = sys.m();
  h->info.construction = ltvsteer::construction_name(h->schedule.construction);
  h->info.n = static_cast<size_t>(sys.n());
  h->info.m = static_cast<size_t>(sys.m());
  h->info.segment_count = h->schedule.segments.size();
  h->info.max_collocation_residual = max_collocation(h->schedule);
  return h;
}

ltv_status to_status(ErrorCode code) { return static_cast<ltv_status>(static_cast<int>(code) + 1); }

template <class F>
ltv_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return LTV_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown failure";
  }
  return LTV_ERR_INTERNAL;
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw Error(ErrorCode::kInvalidArgument, std::string("null ") + what);
}

}  // namespace

extern "C" {

void ltv_options_default(ltv_options* options) {
  if (options == nullptr) return;
  const Settings s;
  options->quad_rtol = s.ode.rtol;
  options->quad_atol = s.ode.atol;
  options->rank_tol = s.rank_tol;
  options->strict_margin = s.strict_margin;
  options->fac_tol = s.fac_tol;
  options->membership_tol = s.membership_tol;
  options->blowup_norm = s.blowup_norm;
  options->schedule_samples = s.schedule_samples;
  options->seed = s.seed;
}

const char* ltv_last_error(void) { return g_last_error.c_str(); }

const char* ltv_status_name(ltv_status status) {
  if (status == LTV_OK) return "Ok";
  if (status == LTV_ERR_INTERNAL) return "Internal";
  const int code = static_cast<int>(status) - 1;
  if (code < 0 || code > static_cast<int>(ErrorCode::kScheduleGap)) return "Unknown";
  return ltvsteer::error_code_name(static_cast<ErrorCode>(code));
}

ltv_status ltv_system_create_constant(size_t n, size_t m, const double* a, const double* b,
                                      double horizon, ltv_system** out) {
  return guarded([&] {
    require(out, "output handle");
    *out = nullptr;
    const auto ni = static_cast<Eigen::Index>(n);
    const auto mi = static_cast<Eigen::Index>(m);
    *out = new ltv_system{LtvSystem::constant(read(a, ni, ni), read(b, ni, mi), horizon)};
  });
}

ltv_status ltv_system_create_polynomial(size_t n, size_t m, size_t a_count, const double* a_coeffs,
                                        size_t b_count, const double* b_coeffs, double horizon,
                                        ltv_system** out) {
  return guarded([&] {
    require(out, "output handle");
    *out = nullptr;
    const auto ni = static_cast<Eigen::Index>(n);
    const auto mi = static_cast<Eigen::Index>(m);
    std::vector<Matrix> ac, bc;
    for (size_t k = 0; k < a_count; ++k) ac.push_back(read(a_coeffs + k * n * n, ni, ni));
    for (size_t k = 0; k < b_count; ++k) bc.push_back(read(b_coeffs + k * n * m, ni, mi));
    *out = new ltv_system{LtvSystem::polynomial(std::move(ac), std::move(bc), horizon)};
  });
}

ltv_status ltv_system_create_sampled(size_t n, size_t m, size_t count, const double* times,
                                     const double* a_samples, const double* b_samples,
                                     double horizon, ltv_system** out) {
  return guarded([&] {
    require(out, "output handle");
    *out = nullptr;
    require(times, "times");
    const auto ni = static_cast<Eigen::Index>(n);
    const auto mi = static_cast<Eigen::Index>(m);
    std::vector<Matrix> as, bs;
    for (size_t k = 0; k < count; ++k) {
      as.push_back(read(a_samples + k * n * n, ni, ni));
      bs.push_back(read(b_samples + k * n * m, ni, mi));
    }
    *out = new ltv_system{LtvSystem::sampled(std::vector<double>(times, times + count),
                                             std::move(as), std::move(bs), horizon)};
  });
}

void ltv_system_destroy(ltv_system* sys) { delete sys; }

ltv_status ltv_system_dims(const ltv_system* sys, size_t* n, size_t* m, double* horizon) {
  return guarded([&] {
    require(sys, "system");
    if (n) *n = static_cast<size_t>(sys->sys.n());
    if (m) *m = static_cast<size_t>(sys->sys.m());
    if (horizon) *horizon = sys->sys.horizon();
  });
}

ltv_status ltv_stm(const ltv_system* sys, double t_from, double t_to, const ltv_options* options,
                   double* phi_out) {
  return guarded([&] {
    require(sys, "system");
    require(phi_out, "output");
    write(ltvsteer::stm(sys->sys, t_from, t_to, to_settings(options).ode), phi_out);
  });
}

ltv_status ltv_gramians(const ltv_system* sys, double t, double t_end, const ltv_options* options,
                        double* g_out, double* h_out, double* u_out, ltv_gramian_info* info) {
  return guarded([&] {
    require(sys, "system");
    const auto r = ltvsteer::ctrl_gramian(sys->sys, t, t_end, to_settings(options));
    write(r.g, g_out);
    write(r.h, h_out);
    write(r.split.u, u_out);
    if (info) {
      info->rank = static_cast<size_t>(r.split.rank);
      info->relation_residual = r.relation_residual;
    }
  });
}

ltv_status ltv_partition_find(const ltv_system* sys, double t_end, const ltv_options* options,
                              ltv_partition* out) {
  return guarded([&] {
    require(sys, "system");
    try {
      fill_partition(ltvsteer::find_partition(sys->sys, t_end, to_settings(options)), out);
    } catch (const ltvsteer::PartitionNotFound& e) {
      fill_partition(e.best_candidate(), out);
      throw;
    }
  });
}

ltv_status ltv_partition_evaluate(const ltv_system* sys, const double times[6],
                                  const ltv_options* options, ltv_partition* out) {
  return guarded([&] {
    require(sys, "system");
    require(times, "times");
    std::array<double, 6> t{};
    for (int i = 0; i < 6; ++i) t[i] = times[i];
    fill_partition(ltvsteer::evaluate_partition(sys->sys, t, to_settings(options)), out);
  });
}

ltv_status ltv_check_phi(const ltv_system* sys, double t_end, const double* phi_f,
                         const ltv_options* options, ltv_phi_check* out, double* bar_phi_out,
                         double* tilde_phi_out) {
  return guarded([&] {
    require(sys, "system");
    const Eigen::Index n = sys->sys.n();
    const auto r = ltvsteer::membership_phi(sys->sys, t_end, read(phi_f, n, n), to_settings(options));
    if (out) {
      out->member = r.member ? 1 : 0;
      out->geometric_member = r.geometric_member ? 1 : 0;
      out->rank = static_cast<size_t>(r.rank);
      out->det_bar_phi = r.det_bar_phi;
      out->lower_left = r.lower_left;
      out->lower_right = r.lower_right;
      out->tolerance = r.tolerance;
    }
    write(r.bar_phi, bar_phi_out);
    write(r.tilde_phi, tilde_phi_out);
  });
}

ltv_status ltv_check_sigma(const ltv_system* sys, double t_end, const double* sigma0,
                           const double* sigma_f, const ltv_options* options,
                           ltv_sigma_check* out) {
  return guarded([&] {
    require(sys, "system");
    const Eigen::Index n = sys->sys.n();
    const auto r = ltvsteer::membership_sigma(sys->sys, t_end, read(sigma0, n, n),
                                              read(sigma_f, n, n), to_settings(options));
    if (out) {
      out->member = r.member ? 1 : 0;
      out->pulled_back_member = r.pulled_back_member ? 1 : 0;
      out->rank = static_cast<size_t>(r.rank);
      out->projected_residual = r.projected_residual;
      out->tolerance = r.tolerance;
      out->pulled_back_residual = r.pulled_back_residual;
      out->pulled_back_tolerance = r.pulled_back_tolerance;
    }
  });
}

ltv_status ltv_synth_phi(const ltv_system* sys, double t_end, const double* phi_f,
                         ltv_phi_method method, const ltv_partition* partition,
                         const ltv_options* options, ltv_schedule** out) {
  return guarded([&] {
    require(sys, "system");
    require(out, "output handle");
    *out = nullptr;
    const Settings settings = to_settings(options);
    const Eigen::Index n = sys->sys.n();
    ltvsteer::PhiMethod m = ltvsteer::PhiMethod::kAuto;
    switch (method) {
      case LTV_PHI_AUTO: m = ltvsteer::PhiMethod::kAuto; break;
      case LTV_PHI_SINGLE_RDE: m = ltvsteer::PhiMethod::kSingleRde; break;
      case LTV_PHI_FIVE_SEGMENT: m = ltvsteer::PhiMethod::kFiveSegment; break;
      default: throw Error(ErrorCode::kInvalidArgument, "unknown method");
    }
    std::optional<ltvsteer::Partition> part;
    if (partition != nullptr) {
      std::array<double, 6> t{};
      for (int i = 0; i < 6; ++i) t[i] = partition->times[i];
      part = ltvsteer::evaluate_partition(sys->sys, t, settings);
    }
    auto r = ltvsteer::synth_phi(sys->sys, t_end, read(phi_f, n, n), m, part, settings);
    ltv_schedule* h = wrap(std::move(r.schedule), sys->sys);
    h->info.rank = static_cast<size_t>(r.membership.rank);
    h->info.det_bar_phi = r.membership.det_bar_phi;
    h->info.factor_residual = r.factor_residual;
    if (r.partition) {
      h->info.has_partition = 1;
      for (int i = 0; i < 6; ++i) h->info.partition[i] = r.partition->times[i];
    }
    *out = h;
  });
}

ltv_status ltv_synth_sigma(const ltv_system* sys, double t_end, const double* sigma0,
                           const double* sigma_f, ltv_sigma_method method,
                           const ltv_options* options, ltv_schedule** out) {
  return guarded([&] {
    require(sys, "system");
    require(out, "output handle");
    *out = nullptr;
    const Settings settings = to_settings(options);
    const Eigen::Index n = sys->sys.n();
    const Matrix s0 = read(sigma0, n, n);
    const Matrix sf = read(sigma_f, n, n);
    ltvsteer::SigmaSynthesis r;
    switch (method) {
      case LTV_SIGMA_GENERAL: r = ltvsteer::synth_sigma(sys->sys, t_end, s0, sf, settings); break;
      case LTV_SIGMA_CONTROLLABLE:
        r = ltvsteer::synth_sigma_controllable(sys->sys, t_end, s0, sf, settings);
        break;
      default: throw Error(ErrorCode::kInvalidArgument, "unknown method");
    }
    ltv_schedule* h = wrap(std::move(r.schedule), sys->sys);
    h->info.rank = static_cast<size_t>(r.membership.rank);
    h->info.lift_residual = r.lift.reconstruction_residual;
    *out = h;
  });
}

ltv_status ltv_schedule_from_segments(const ltv_system* sys, size_t count, const double* starts,
                                      const double* ends, const double* pis,
                                      const ltv_options* options, ltv_schedule** out) {
  return guarded([&] {
    require(sys, "system");
    require(out, "output handle");
    *out = nullptr;
    if (count == 0) throw Error(ErrorCode::kInvalidArgument, "empty schedule");
    require(starts, "starts");
    require(ends, "ends");
    const Eigen::Index n = sys->sys.n();
    std::vector<Matrix> p;
    for (size_t i = 0; i < count; ++i) p.push_back(read(pis + i * n * n, n, n));
    auto s = ltvsteer::build_schedule(sys->sys, std::vector<double>(starts, starts + count),
                                      std::vector<double>(ends, ends + count), p,
                                      ltvsteer::Construction::kExternal, to_settings(options));
    *out = wrap(std::move(s), sys->sys);
  });
}

void ltv_schedule_destroy(ltv_schedule* schedule) { delete schedule; }

ltv_status ltv_schedule_get_info(const ltv_schedule* schedule, ltv_schedule_info* info) {
  return guarded([&] {
    require(schedule, "schedule");
    require(info, "info");
    *info = schedule->info;
  });
}

ltv_status ltv_schedule_segment(const ltv_schedule* schedule, size_t index, double* start,
                                double* end, double* pi_start, size_t* sample_count) {
  return guarded([&] {
    require(schedule, "schedule");
    if (index >= schedule->schedule.segments.size()) {
      throw Error(ErrorCode::kInvalidArgument, "segment index out of range");
    }
    const auto& seg = schedule->schedule.segments[index];
    if (start) *start = seg.start;
    if (end) *end = seg.end;
    write(seg.pi_start, pi_start);
    if (sample_count) *sample_count = seg.times.size();
  });
}

ltv_status ltv_schedule_sample(const ltv_schedule* schedule, size_t segment, size_t index,
                               double* t, double* pi, double* k) {
  return guarded([&] {
    require(schedule, "schedule");
    if (segment >= schedule->schedule.segments.size()) {
      throw Error(ErrorCode::kInvalidArgument, "segment index out of range");
    }
    const auto& seg = schedule->schedule.segments[segment];
    if (index >= seg.times.size()) throw Error(ErrorCode::kInvalidArgument, "sample index out of range");
    if (t) *t = seg.times[index];
    write(seg.pi[index], pi);
    write(seg.k[index], k);
  });
}

void ltv_sim_options_default(ltv_sim_options* options) {
  if (options == nullptr) return;
  *options = ltv_sim_options{};
  options->grid = 600;
}

ltv_status ltv_simulate(const ltv_system* sys, const ltv_schedule* schedule,
                        const ltv_sim_options* sim, const ltv_options* options,
                        ltv_trajectory** out) {
  return guarded([&] {
    require(sys, "system");
    require(schedule, "schedule");
    require(out, "output handle");
    *out = nullptr;
    if (schedule->n != sys->sys.n()) throw Error(ErrorCode::kInvalidArgument, "dimension mismatch");
    auto traj = ltvsteer::simulate(sys->sys, schedule->schedule, to_sim(sim, sys->sys.n()),
                                   to_settings(options));
    *out = new ltv_trajectory{std::move(traj), sys->sys.n()};
  });
}

void ltv_trajectory_destroy(ltv_trajectory* trajectory) { delete trajectory; }

ltv_status ltv_trajectory_get_info(const ltv_trajectory* trajectory, ltv_trajectory_info* info) {
  return guarded([&] {
    require(trajectory, "trajectory");
    require(info, "info");
    const auto& tr = trajectory->traj;
    info->length = tr.times.size();
    info->n = static_cast<size_t>(trajectory->n);
    info->tracer_count = tr.tracers.empty() ? 0 : tr.tracers.front().size();
    info->has_sigma = tr.sigma.empty() ? 0 : 1;
    info->det_positive = tr.det_positive ? 1 : 0;
    info->schedule_complete = tr.schedule_complete ? 1 : 0;
    info->min_det = tr.min_det;
    info->max_sigma_asymmetry = tr.max_sigma_asymmetry;
  });
}

ltv_status ltv_trajectory_sample(const ltv_trajectory* trajectory, size_t index, double* t,
                                 int* segment, double* phi, double* sigma, double* tracers) {
  return guarded([&] {
    require(trajectory, "trajectory");
    const auto& tr = trajectory->traj;
    if (index >= tr.times.size()) throw Error(ErrorCode::kInvalidArgument, "sample index out of range");
    if (t) *t = tr.times[index];
    if (segment) *segment = tr.segment[index];
    write(tr.phi[index], phi);
    if (sigma && !tr.sigma.empty()) write(tr.sigma[index], sigma);
    if (tracers && !tr.tracers.empty()) {
      const auto n = static_cast<std::size_t>(trajectory->n);
      const auto& states = tr.tracers[index];
      for (std::size_t j = 0; j < states.size(); ++j) {
        Eigen::Map<ltvsteer::Vector>(tracers + j * n, trajectory->n) = states[j];
      }
    }
  });
}

ltv_status ltv_verify_phi(const ltv_system* sys, const ltv_schedule* schedule, const double* phi_f,
                          const ltv_sim_options* sim, const ltv_options* options,
                          ltv_verify_report* report, double* achieved) {
  return guarded([&] {
    require(sys, "system");
    require(schedule, "schedule");
    const Eigen::Index n = sys->sys.n();
    const auto r = ltvsteer::verify_phi(sys->sys, schedule->schedule, read(phi_f, n, n),
                                        to_sim(sim, n), to_settings(options));
    if (report) {
      report->residual = r.residual;
      report->relative_residual = r.relative_residual;
      report->min_det = r.min_det;
      report->det_positive = r.det_positive ? 1 : 0;
      report->schedule_complete = r.schedule_complete ? 1 : 0;
    }
    write(r.achieved, achieved);
  });
}

ltv_status ltv_verify_sigma(const ltv_system* sys, const ltv_schedule* schedule,
                            const double* sigma0, const double* sigma_f,
                            const ltv_sim_options* sim, const ltv_options* options,
                            ltv_verify_report* report, double* achieved) {
  return guarded([&] {
    require(sys, "system");
    require(schedule, "schedule");
    const Eigen::Index n = sys->sys.n();
    const auto r = ltvsteer::verify_sigma(sys->sys, schedule->schedule, read(sigma0, n, n),
                                          read(sigma_f, n, n), to_sim(sim, n), to_settings(options));
    if (report) {
      report->residual = r.residual;
      report->relative_residual = r.relative_residual;
      report->min_det = r.min_det;
      report->det_positive = r.det_positive ? 1 : 0;
      report->schedule_complete = r.schedule_complete ? 1 : 0;
    }
    write(r.achieved, achieved);
  });
}

ltv_status ltv_covariance_axes(size_t n, const double* sigma, double scale, double* axes_out) {
  return guarded([&] {
    require(axes_out, "output");
    const auto ni = static_cast<Eigen::Index>(n);
    write(ltvsteer::covariance_axes(read(sigma, ni, ni), scale), axes_out);
  });
}

}  // extern "C"
