#include "cli/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>

#include "CLI11.hpp"

namespace ltvcli {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ojson to_json(const Mat& m) {
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    ojson row = ojson::array();
    for (std::size_t j = 0; j < m.cols; ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void matrix_header(std::ostream& os, const std::string& name, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 1; i <= rows; ++i) {
    for (std::size_t j = 1; j <= cols; ++j) os << ',' << name << '_' << i << '_' << j;
  }
}

void matrix_row(std::ostream& os, const double* v, std::size_t count) {
  for (std::size_t k = 0; k < count; ++k) os << ',' << fmt(v[k]);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

struct Context {
  Context(const Scenario& sc, const fs::path& o) : s(sc), out(o), sys(make_system(sc)) {}

  const Scenario& s;
  const fs::path& out;
  System sys;
  std::size_t n = 0;
  std::size_t m = 0;
  double t_end = 0.0;
  ojson report;
  ojson timings = ojson::object();
};

ojson options_json(const ltv_options& o) {
  return ojson{{"quad_rtol", o.quad_rtol},         {"quad_atol", o.quad_atol},
               {"rank_tol", o.rank_tol},           {"strict_margin", o.strict_margin},
               {"fac_tol", o.fac_tol},             {"membership_tol", o.membership_tol},
               {"blowup_norm", o.blowup_norm},     {"schedule_samples", o.schedule_samples}};
}

ojson partition_json(const ltv_partition& p) {
  return ojson{{"times", std::vector<double>(p.times, p.times + 6)},
               {"segment_ranks", std::vector<std::size_t>(p.segment_ranks, p.segment_ranks + 5)},
               {"global_rank", p.global_rank},
               {"range_residual", p.range_residual},
               {"certified", p.certified != 0}};
}

ojson schedule_json(const ltv_schedule_info& info) {
  ojson j{{"construction", info.construction},
          {"segments", info.segment_count},
          {"max_collocation_residual", info.max_collocation_residual}};
  if (info.has_partition) j["partition"] = std::vector<double>(info.partition, info.partition + 6);
  if (std::string(info.construction).rfind("five_segment", 0) == 0) {
    j["factor_residual"] = info.factor_residual;
  }
  if (std::string(info.construction) == "covariance_general") j["lift_residual"] = info.lift_residual;
  return j;
}

ojson verify_json(const ltv_verify_report& r, const Mat& achieved) {
  return ojson{{"residual", r.residual},
               {"relative_residual", r.relative_residual},
               {"min_det", r.min_det},
               {"det_positive", r.det_positive != 0},
               {"schedule_complete", r.schedule_complete != 0},
               {"achieved", to_json(achieved)}};
}

void write_schedule_csv(const Context& c, const ltv_schedule* sched) {
  ltv_schedule_info info{};
  check(ltv_schedule_get_info(sched, &info));
  std::ofstream os = open_out(c.out / "schedule.csv");
  os << "segment,t";
  matrix_header(os, "Pi", c.n, c.n);
  matrix_header(os, "K", c.m, c.n);
  os << '\n';
  std::vector<double> pi(c.n * c.n), k(c.m * c.n);
  for (std::size_t seg = 0; seg < info.segment_count; ++seg) {
    std::size_t count = 0;
    check(ltv_schedule_segment(sched, seg, nullptr, nullptr, nullptr, &count));
    for (std::size_t j = 0; j < count; ++j) {
      double t = 0.0;
      check(ltv_schedule_sample(sched, seg, j, &t, pi.data(), k.data()));
      os << seg + 1 << ',' << fmt(t);
      matrix_row(os, pi.data(), pi.size());
      matrix_row(os, k.data(), k.size());
      os << '\n';
    }
  }
}

struct SimulationRequest {
  std::vector<double> extra_times;
  std::optional<Mat> sigma0;
  std::vector<std::vector<double>> tracers;
  bool has_mean = false;  // first tracer is the mean
  bool allow_tail = false;
};

// Ellipse snapshots at t = k T / 6.
std::vector<double> ellipse_times(double t_end) {
  std::vector<double> t;
  for (int k = 0; k <= 6; ++k) t.push_back(t_end * k / 6.0);
  return t;
}

SimulationRequest simulation_request(const Context& c, const std::optional<Mat>& sigma0) {
  SimulationRequest r;
  r.extra_times = c.s.simulation.extra_times;
  r.sigma0 = sigma0 ? sigma0 : c.s.simulation.sigma0;
  if (c.s.simulation.mean0) {
    r.tracers.push_back(*c.s.simulation.mean0);
    r.has_mean = true;
  }
  for (const auto& x : c.s.simulation.tracers) r.tracers.push_back(x);
  if (r.sigma0) {
    for (double t : ellipse_times(c.t_end)) r.extra_times.push_back(t);
  }
  r.allow_tail = c.s.simulation.allow_open_loop_tail;
  return r;
}

struct SimBuffers {
  ltv_sim_options opts{};
  std::vector<double> tracers;
};

SimBuffers sim_options(const Context& c, const SimulationRequest& r) {
  SimBuffers b;
  ltv_sim_options_default(&b.opts);
  b.opts.grid = c.s.simulation.grid;
  b.opts.extra_times = r.extra_times.data();
  b.opts.extra_count = r.extra_times.size();
  b.opts.sigma0 = r.sigma0 ? r.sigma0->data() : nullptr;
  for (const auto& x : r.tracers) b.tracers.insert(b.tracers.end(), x.begin(), x.end());
  b.opts.tracers = b.tracers.data();
  b.opts.tracer_count = r.tracers.size();
  b.opts.allow_open_loop_tail = r.allow_tail ? 1 : 0;
  b.opts.t_end = c.t_end;
  return b;
}

// Simulates the schedule and writes trajectory.csv, plus ellipses.csv when
// a covariance is propagated. Returns the trajectory summary.
ojson write_trajectory(const Context& c, const ltv_schedule* sched, const SimulationRequest& r) {
  SimBuffers b = sim_options(c, r);
  ltv_trajectory* raw = nullptr;
  check(ltv_simulate(c.sys.get(), sched, &b.opts, &c.s.options, &raw));
  Trajectory traj(raw);
  ltv_trajectory_info info{};
  check(ltv_trajectory_get_info(traj.get(), &info));

  std::ofstream os = open_out(c.out / "trajectory.csv");
  os << "t,segment";
  matrix_header(os, "Phi", c.n, c.n);
  if (info.has_sigma) matrix_header(os, "Sigma", c.n, c.n);
  for (std::size_t k = 0; k < r.tracers.size(); ++k) {
    for (std::size_t i = 1; i <= c.n; ++i) {
      if (r.has_mean && k == 0) {
        os << ",mean_" << i;
      } else {
        os << ",tracer" << (r.has_mean ? k : k + 1) << '_' << i;
      }
    }
  }
  os << '\n';
  std::vector<double> phi(c.n * c.n), sigma(c.n * c.n), tracers(r.tracers.size() * c.n);
  const std::vector<double> snaps = ellipse_times(c.t_end);
  std::ofstream ell;
  if (info.has_sigma) {
    ell = open_out(c.out / "ellipses.csv");
    ell << "t";
    for (std::size_t i = 1; i <= c.n; ++i) ell << ",center_" << i;
    for (std::size_t j = 1; j <= c.n; ++j) {
      for (std::size_t i = 1; i <= c.n; ++i) ell << ",axis" << j << "_x" << i;
    }
    ell << '\n';
  }
  std::size_t next_snap = 0;
  std::vector<double> axes(c.n * c.n);
  for (std::size_t idx = 0; idx < info.length; ++idx) {
    double t = 0.0;
    int seg = 0;
    check(ltv_trajectory_sample(traj.get(), idx, &t, &seg, phi.data(),
                                info.has_sigma ? sigma.data() : nullptr, tracers.data()));
    os << fmt(t) << ',' << (seg >= 0 ? seg + 1 : 0);
    matrix_row(os, phi.data(), phi.size());
    if (info.has_sigma) matrix_row(os, sigma.data(), sigma.size());
    matrix_row(os, tracers.data(), tracers.size());
    os << '\n';
    if (info.has_sigma && next_snap < snaps.size() &&
        std::abs(t - snaps[next_snap]) <= 1e-12 * std::max(1.0, c.t_end)) {
      check(ltv_covariance_axes(c.n, sigma.data(), 3.0, axes.data()));
      ell << fmt(t);
      for (std::size_t i = 0; i < c.n; ++i) ell << ',' << fmt(r.has_mean ? tracers[i] : 0.0);
      for (std::size_t j = 0; j < c.n; ++j) {
        for (std::size_t i = 0; i < c.n; ++i) ell << ',' << fmt(axes[i * c.n + j]);
      }
      ell << '\n';
      ++next_snap;
    }
  }
  ojson j{{"samples", info.length},
          {"min_det", info.min_det},
          {"det_positive", info.det_positive != 0},
          {"schedule_complete", info.schedule_complete != 0}};
  if (info.has_sigma) {
    j["max_sigma_asymmetry"] = info.max_sigma_asymmetry;
    j["ellipse_snapshots"] = next_snap;
  }
  return j;
}

Mat open_loop(const Context& c) {
  Mat phi(c.n, c.n);
  check(ltv_stm(c.sys.get(), 0.0, c.t_end, &c.s.options, phi.data()));
  return phi;
}

int task_gramian(Context& c) {
  const auto t0 = Clock::now();
  Mat g(c.n, c.n), h(c.n, c.n), u(c.n, c.n), phi(c.n, c.n);
  ltv_gramian_info info{};
  check(ltv_gramians(c.sys.get(), c.s.t_start, c.t_end, &c.s.options, g.data(), h.data(), u.data(),
                     &info));
  check(ltv_stm(c.sys.get(), c.s.t_start, c.t_end, &c.s.options, phi.data()));
  c.timings["gramian_s"] = seconds_since(t0);
  c.report["decision"] = "computed";
  c.report["gramian"] = ojson{{"t", c.s.t_start},
                              {"t_end", c.t_end},
                              {"rank", info.rank},
                              {"relation_residual", info.relation_residual},
                              {"G", to_json(g)},
                              {"H", to_json(h)},
                              {"U", to_json(u)},
                              {"Phi_A", to_json(phi)}};
  return kExitSuccess;
}

int task_partition(Context& c) {
  const auto t0 = Clock::now();
  ltv_partition p{};
  int code = kExitSuccess;
  if (c.s.partition) {
    check(ltv_partition_evaluate(c.sys.get(), c.s.partition->data(), &c.s.options, &p));
    code = p.certified ? kExitSuccess : kExitInfeasible;
  } else {
    const ltv_status st = ltv_partition_find(c.sys.get(), c.t_end, &c.s.options, &p);
    if (st == LTV_ERR_PARTITION_NOT_FOUND) {
      code = kExitInfeasible;
      c.report["message"] = ltv_last_error();
    } else {
      check(st);
    }
  }
  c.timings["partition_s"] = seconds_since(t0);
  c.report["decision"] = code == kExitSuccess ? "found" : "not_found";
  c.report["partition"] = partition_json(p);
  return code;
}

ojson phi_membership(const Context& c, ltv_phi_check& chk) {
  Mat bar(c.n, c.n), tilde(c.n, c.n);
  check(ltv_check_phi(c.sys.get(), c.t_end, c.s.phi_f->data(), &c.s.options, &chk, bar.data(),
                      tilde.data()));
  const std::size_t r = chk.rank;
  Mat bar_r(r, r), tilde_r(r, c.n - r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) bar_r(i, j) = bar.v[i * r + j];
    for (std::size_t j = 0; j < c.n - r; ++j) tilde_r(i, j) = tilde.v[i * (c.n - r) + j];
  }
  return ojson{{"member", chk.member != 0},
               {"geometric_member", chk.geometric_member != 0},
               {"rank", r},
               {"det_barPhi_f", chk.det_bar_phi},
               {"lower_left", chk.lower_left},
               {"lower_right", chk.lower_right},
               {"tolerance", chk.tolerance},
               {"barPhi_f", to_json(bar_r)},
               {"tildePhi_f", to_json(tilde_r)}};
}

ojson sigma_membership(const Context& c, ltv_sigma_check& chk) {
  check(ltv_check_sigma(c.sys.get(), c.t_end, c.s.sigma0->data(), c.s.sigma_f->data(),
                        &c.s.options, &chk));
  const Mat phi = open_loop(c);
  const Mat free = phi * (*c.s.sigma0) * transpose(phi);
  return ojson{{"member", chk.member != 0},
               {"pulled_back_member", chk.pulled_back_member != 0},
               {"rank", chk.rank},
               {"projected_equality",
                ojson{{"holds", chk.member != 0},
                      {"residual", chk.projected_residual},
                      {"tolerance", chk.tolerance},
                      {"open_loop_covariance", to_json(free)},
                      {"sigma_f", to_json(*c.s.sigma_f)}}},
               {"pulled_back",
                ojson{{"residual", chk.pulled_back_residual},
                      {"tolerance", chk.pulled_back_tolerance}}}};
}

int task_check_phi(Context& c) {
  const auto t0 = Clock::now();
  ltv_phi_check chk{};
  c.report["membership"] = phi_membership(c, chk);
  c.report["det_barPhi_f"] = chk.det_bar_phi;
  c.timings["membership_s"] = seconds_since(t0);
  c.report["decision"] = chk.member ? "reachable" : "unreachable";
  return chk.member ? kExitSuccess : kExitInfeasible;
}

int task_check_sigma(Context& c) {
  const auto t0 = Clock::now();
  ltv_sigma_check chk{};
  c.report["membership"] = sigma_membership(c, chk);
  c.timings["membership_s"] = seconds_since(t0);
  c.report["decision"] = chk.member ? "reachable" : "unreachable";
  return chk.member ? kExitSuccess : kExitInfeasible;
}

int task_steer_phi(Context& c) {
  auto t0 = Clock::now();
  ltv_phi_check chk{};
  c.report["membership"] = phi_membership(c, chk);
  c.report["det_barPhi_f"] = chk.det_bar_phi;
  c.timings["membership_s"] = seconds_since(t0);
  if (!chk.member) {
    c.report["decision"] = "unreachable";
    return kExitInfeasible;
  }
  t0 = Clock::now();
  ltv_phi_method method = LTV_PHI_AUTO;
  if (c.s.method == "single-rde") method = LTV_PHI_SINGLE_RDE;
  if (c.s.method == "five-segment") method = LTV_PHI_FIVE_SEGMENT;
  ltv_partition part{};
  if (c.s.partition) std::copy(c.s.partition->begin(), c.s.partition->end(), part.times);
  ltv_schedule* raw = nullptr;
  const ltv_status st = ltv_synth_phi(c.sys.get(), c.t_end, c.s.phi_f->data(), method,
                                      c.s.partition ? &part : nullptr, &c.s.options, &raw);
  if (st == LTV_ERR_INFEASIBLE_TARGET) {
    c.report["decision"] = "unreachable";
    c.report["message"] = ltv_last_error();
    return kExitInfeasible;
  }
  check(st);
  Schedule sched(raw);
  c.timings["synthesis_s"] = seconds_since(t0);
  ltv_schedule_info info{};
  check(ltv_schedule_get_info(sched.get(), &info));
  c.report["decision"] = "reachable";
  c.report["certificate"] = schedule_json(info);

  t0 = Clock::now();
  const SimulationRequest req = simulation_request(c, std::nullopt);
  SimBuffers b = sim_options(c, req);
  ltv_verify_report rep{};
  Mat achieved(c.n, c.n);
  check(ltv_verify_phi(c.sys.get(), sched.get(), c.s.phi_f->data(), &b.opts, &c.s.options, &rep,
                       achieved.data()));
  c.report["terminal"] = verify_json(rep, achieved);
  c.report["trajectory"] = write_trajectory(c, sched.get(), req);
  write_schedule_csv(c, sched.get());
  c.timings["verification_s"] = seconds_since(t0);
  return kExitSuccess;
}

int task_steer_sigma(Context& c) {
  auto t0 = Clock::now();
  ltv_sigma_check chk{};
  c.report["membership"] = sigma_membership(c, chk);
  c.timings["membership_s"] = seconds_since(t0);
  if (!chk.member) {
    c.report["decision"] = "unreachable";
    return kExitInfeasible;
  }
  t0 = Clock::now();
  const ltv_sigma_method method =
      c.s.method == "controllable" ? LTV_SIGMA_CONTROLLABLE : LTV_SIGMA_GENERAL;
  ltv_schedule* raw = nullptr;
  const ltv_status st = ltv_synth_sigma(c.sys.get(), c.t_end, c.s.sigma0->data(),
                                        c.s.sigma_f->data(), method, &c.s.options, &raw);
  if (st == LTV_ERR_INFEASIBLE_TARGET) {
    c.report["decision"] = "unreachable";
    c.report["message"] = ltv_last_error();
    return kExitInfeasible;
  }
  check(st);
  Schedule sched(raw);
  c.timings["synthesis_s"] = seconds_since(t0);
  ltv_schedule_info info{};
  check(ltv_schedule_get_info(sched.get(), &info));
  c.report["decision"] = "reachable";
  c.report["certificate"] = schedule_json(info);
  Mat pi0(c.n, c.n);
  check(ltv_schedule_segment(sched.get(), 0, nullptr, nullptr, pi0.data(), nullptr));
  c.report["certificate"]["pi0"] = to_json(pi0);

  t0 = Clock::now();
  const SimulationRequest req = simulation_request(c, c.s.sigma0);
  SimBuffers b = sim_options(c, req);
  ltv_verify_report rep{};
  Mat achieved(c.n, c.n);
  check(ltv_verify_sigma(c.sys.get(), sched.get(), c.s.sigma0->data(), c.s.sigma_f->data(),
                         &b.opts, &c.s.options, &rep, achieved.data()));
  c.report["terminal"] = verify_json(rep, achieved);
  c.report["trajectory"] = write_trajectory(c, sched.get(), req);
  write_schedule_csv(c, sched.get());
  c.timings["verification_s"] = seconds_since(t0);
  return kExitSuccess;
}

int task_simulate(Context& c) {
  const auto t0 = Clock::now();
  std::vector<double> starts, ends, pis;
  for (const SegmentSpec& seg : c.s.segments) {
    starts.push_back(seg.start);
    ends.push_back(seg.end);
    pis.insert(pis.end(), seg.pi0.v.begin(), seg.pi0.v.end());
  }
  ltv_schedule* raw = nullptr;
  check(ltv_schedule_from_segments(c.sys.get(), starts.size(), starts.data(), ends.data(),
                                   pis.data(), &c.s.options, &raw));
  Schedule sched(raw);
  const std::optional<Mat> sigma0 = c.s.sigma0 ? c.s.sigma0 : c.s.simulation.sigma0;
  const SimulationRequest req = simulation_request(c, sigma0);
  c.report["decision"] = "simulated";
  c.report["trajectory"] = write_trajectory(c, sched.get(), req);
  SimBuffers b = sim_options(c, req);
  if (c.s.phi_f) {
    ltv_verify_report rep{};
    Mat achieved(c.n, c.n);
    check(ltv_verify_phi(c.sys.get(), sched.get(), c.s.phi_f->data(), &b.opts, &c.s.options, &rep,
                         achieved.data()));
    c.report["terminal"] = verify_json(rep, achieved);
  } else if (sigma0 && c.s.sigma_f) {
    ltv_verify_report rep{};
    Mat achieved(c.n, c.n);
    check(ltv_verify_sigma(c.sys.get(), sched.get(), sigma0->data(), c.s.sigma_f->data(), &b.opts,
                           &c.s.options, &rep, achieved.data()));
    c.report["terminal"] = verify_json(rep, achieved);
  }
  write_schedule_csv(c, sched.get());
  c.timings["simulation_s"] = seconds_since(t0);
  return kExitSuccess;
}

void write_report(const fs::path& out, ojson report) {
  std::ofstream os = open_out(out / "report.json");
  os << report.dump(2) << '\n';
}

}  // namespace

void apply(const Overrides& o, Scenario& s) {
  if (o.tol_quad) {
    s.options.quad_rtol = *o.tol_quad;
    s.options.quad_atol = *o.tol_quad;
  }
  if (o.tol_fac) s.options.fac_tol = *o.tol_fac;
  if (o.seed) s.options.seed = *o.seed;
}

Scenario example_scenario(const std::string& name) {
  Scenario s;
  ltv_options_default(&s.options);
  s.name = name;
  s.system.kind = "constant";
  if (name == "ex1") {
    const double w = std::numbers::pi / 4.0;
    Mat a(3, 3), b(3, 2);
    a(0, 1) = -w;
    a(1, 0) = w;
    a(2, 2) = -0.43;
    b(0, 0) = 1.0;
    b(1, 1) = 1.0;
    s.system.n = 3;
    s.system.m = 2;
    s.system.a = {a};
    s.system.b = {b};
    s.horizon = 2.0;
    s.task = "steer-phi";
    s.method = "five-segment";
    const System sys = make_system(s);

    // Target e^{2A} U [[bar, tilde], [0, 1]] U^T with bar a 1.8-scaled
    // quarter turn on range H(2,0).
    Mat u(3, 3), phi_a(3, 3);
    ltv_gramian_info info{};
    check(ltv_gramians(sys.get(), 0.0, 2.0, &s.options, nullptr, nullptr, u.data(), &info));
    check(ltv_stm(sys.get(), 0.0, 2.0, &s.options, phi_a.data()));
    Mat blk = Mat::identity(3);
    blk(0, 0) = 1.8 * std::cos(std::numbers::pi / 2);
    blk(0, 1) = -1.8 * std::sin(std::numbers::pi / 2);
    blk(1, 0) = 1.8 * std::sin(std::numbers::pi / 2);
    blk(1, 1) = 1.8 * std::cos(std::numbers::pi / 2);
    blk(0, 2) = 0.3;
    blk(1, 2) = -0.2;
    s.phi_f = phi_a * u * blk * transpose(u);

    const double c = 1.0 / std::sqrt(3.0);
    s.simulation.tracers = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {c, -c, c}};
  } else if (name == "ex2") {
    Mat a(2, 2), b(2, 1);
    a(0, 0) = 0.2;
    a(0, 1) = 0.8;
    a(1, 1) = 0.3;
    b(0, 0) = 1.0;
    s.system.n = 2;
    s.system.m = 1;
    s.system.a = {a};
    s.system.b = {b};
    s.horizon = 1.0;
    s.task = "steer-sigma";
    s.method = "general";
    s.sigma0 = Mat::identity(2);
    Mat sf(2, 2);
    sf(0, 0) = 0.2;
    sf(1, 1) = std::exp(0.6);
    s.sigma_f = sf;
    s.simulation.mean0 = std::vector<double>{1.0, -0.5};
  } else {
    throw ScenarioError("unknown example '" + name + "' (expected ex1 or ex2)");
  }
  return s;
}

int run_scenario(const Scenario& scenario, const fs::path& out, std::ostream& err) {
  const auto start = Clock::now();
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    err << "error: cannot create output directory " << out << ": " << ec.message() << '\n';
    return kExitError;
  }
  Scenario example;
  const Scenario* sp = &scenario;
  ojson report;
  if (scenario.task == "example") {
    try {
      example = example_scenario(scenario.example);
      example.options = scenario.options;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitError;
    }
    sp = &example;
  }
  const Scenario& s = *sp;
  report["scenario"] = s.name;
  report["task"] = s.task;
  if (!s.method.empty()) report["method"] = s.method;
  report["seed"] = s.options.seed;
  report["tolerances"] = options_json(s.options);

  int code = kExitError;
  ojson timings = ojson::object();
  try {
    Context c(s, out);
    check(ltv_system_dims(c.sys.get(), &c.n, &c.m, nullptr));
    c.t_end = s.t_end.value_or(s.horizon);
    c.report = std::move(report);
    c.report["system"] = ojson{{"kind", s.system.kind}, {"n", c.n}, {"m", c.m}, {"horizon", s.horizon}};
    if (s.task == "gramian") code = task_gramian(c);
    else if (s.task == "partition") code = task_partition(c);
    else if (s.task == "check-phi") code = task_check_phi(c);
    else if (s.task == "check-sigma") code = task_check_sigma(c);
    else if (s.task == "steer-phi") code = task_steer_phi(c);
    else if (s.task == "steer-sigma") code = task_steer_sigma(c);
    else if (s.task == "simulate") code = task_simulate(c);
    report = std::move(c.report);
    timings = std::move(c.timings);
  } catch (const ApiError& e) {
    err << "error: " << e.what() << '\n';
    report["decision"] = "error";
    report["error"] = ojson{{"status", ltv_status_name(e.status())}, {"message", e.what()}};
    code = kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    report["decision"] = "error";
    report["error"] = ojson{{"status", "Internal"}, {"message", e.what()}};
    code = kExitError;
  }
  report["exit_code"] = code;
  timings["total_s"] = seconds_since(start);
  report["timings"] = timings;
  try {
    write_report(out, std::move(report));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return code;
}

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reachability analysis and feedback steering for linear time-varying systems",
               "ltv-steer"};
  app.require_subcommand(1);

  std::string scenario_path, example_name, out_dir;
  double tol_quad = 0.0, tol_fac = 0.0;
  std::uint64_t seed = 0;

  CLI::App* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  CLI::Option* quad_opt = run->add_option("--tol-quad", tol_quad, "Quadrature tolerance (rtol and atol)")
                              ->check(CLI::PositiveNumber);
  CLI::Option* fac_opt =
      run->add_option("--tol-fac", tol_fac, "Factorization tolerance")->check(CLI::PositiveNumber);
  CLI::Option* seed_opt = run->add_option("--seed", seed, "Random seed");

  CLI::App* ex = app.add_subcommand("example", "Reproduce a built-in example");
  ex->add_option("name", example_name, "ex1 or ex2")->required()->check(CLI::IsMember({"ex1", "ex2"}));
  ex->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitSuccess : kExitError;
  }

  Scenario s;
  try {
    if (*run) {
      s = load_scenario(scenario_path);
      Overrides o;
      if (*quad_opt) o.tol_quad = tol_quad;
      if (*fac_opt) o.tol_fac = tol_fac;
      if (*seed_opt) o.seed = seed;
      apply(o, s);
    } else {
      s = example_scenario(example_name);
    }
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const ApiError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  const int code = run_scenario(s, out_dir, err);
  if (code != kExitError) {
    out << "wrote " << (fs::path(out_dir) / "report.json").string() << " (exit " << code << ")\n";
  }
  return code;
}

}  // namespace ltvcli
