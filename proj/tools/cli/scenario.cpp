#include "cli/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace ltvcli {

using nlohmann::json;

Mat operator*(const Mat& a, const Mat& b) {
  Mat c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Mat transpose(const Mat& a) {
  Mat t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  }
  return t;
}

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ScenarioError("scenario field '" + field + "' " + what);
}

const json& member(const json& obj, const std::string& key, const std::string& field) {
  if (!obj.is_object() || !obj.contains(key)) fail(field, "is missing");
  return obj.at(key);
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(field, "must be finite");
  return x;
}

std::vector<double> vector_of(const json& v, const std::string& field) {
  if (!v.is_array()) fail(field, "must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Mat matrix(const json& v, const std::string& field, std::size_t rows, std::size_t cols) {
  if (!v.is_array() || v.size() != rows) {
    fail(field, "must be a " + std::to_string(rows) + " x " + std::to_string(cols) + " matrix");
  }
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!v[i].is_array() || v[i].size() != cols) {
      fail(field, "must be a " + std::to_string(rows) + " x " + std::to_string(cols) + " matrix");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      m(i, j) = number(v[i][j], field + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
  }
  return m;
}

// Row count and column count of a nested row array.
std::pair<std::size_t, std::size_t> shape(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty() || !v[0].is_array()) fail(field, "must be a nested row array");
  return {v.size(), v[0].size()};
}

// Polynomial entries: matrix of coefficient lists, returned as one matrix per
// degree.
std::vector<Mat> coefficient_matrices(const json& v, const std::string& field, std::size_t rows,
                                      std::size_t cols) {
  if (!v.is_array() || v.size() != rows) fail(field, "must have " + std::to_string(rows) + " rows");
  std::size_t degree = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (!v[i].is_array() || v[i].size() != cols) {
      fail(field, "must have " + std::to_string(cols) + " columns");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      const json& e = v[i][j];
      const std::size_t len = e.is_array() ? e.size() : 1;
      if (len == 0) fail(field, "entries need at least one coefficient");
      degree = std::max(degree, len);
    }
  }
  std::vector<Mat> out(degree, Mat(rows, cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const json& e = v[i][j];
      const std::string f = field + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
      if (e.is_array()) {
        for (std::size_t k = 0; k < e.size(); ++k) out[k](i, j) = number(e[k], f);
      } else {
        out[0](i, j) = number(e, f);
      }
    }
  }
  return out;
}

SystemSpec parse_system(const json& sys) {
  SystemSpec s;
  if (!sys.is_object()) fail("system", "must be an object");
  const json& kind = member(sys, "kind", "system.kind");
  if (!kind.is_string()) fail("system.kind", "must be a string");
  s.kind = kind.get<std::string>();
  if (s.kind == "constant") {
    const auto [n, nc] = shape(member(sys, "A", "system.A"), "system.A");
    if (n != nc) fail("system.A", "must be square");
    const auto [bn, m] = shape(member(sys, "B", "system.B"), "system.B");
    if (bn != n) fail("system.B", "must have as many rows as A");
    s.n = n;
    s.m = m;
    s.a.push_back(matrix(sys.at("A"), "system.A", n, n));
    s.b.push_back(matrix(sys.at("B"), "system.B", n, m));
  } else if (s.kind == "polynomial") {
    const auto [n, nc] = shape(member(sys, "A", "system.A"), "system.A");
    if (n != nc) fail("system.A", "must be square");
    const auto [bn, m] = shape(member(sys, "B", "system.B"), "system.B");
    if (bn != n) fail("system.B", "must have as many rows as A");
    s.n = n;
    s.m = m;
    s.a = coefficient_matrices(sys.at("A"), "system.A", n, n);
    s.b = coefficient_matrices(sys.at("B"), "system.B", n, m);
  } else if (s.kind == "sampled") {
    s.times = vector_of(member(sys, "times", "system.times"), "system.times");
    const json& as = member(sys, "A_samples", "system.A_samples");
    const json& bs = member(sys, "B_samples", "system.B_samples");
    if (!as.is_array() || as.size() != s.times.size() || as.empty()) {
      fail("system.A_samples", "must hold one matrix per time");
    }
    if (!bs.is_array() || bs.size() != s.times.size()) {
      fail("system.B_samples", "must hold one matrix per time");
    }
    const auto [n, nc] = shape(as[0], "system.A_samples[0]");
    if (n != nc) fail("system.A_samples[0]", "must be square");
    const auto [bn, m] = shape(bs[0], "system.B_samples[0]");
    if (bn != n) fail("system.B_samples[0]", "must have as many rows as A");
    s.n = n;
    s.m = m;
    for (std::size_t k = 0; k < s.times.size(); ++k) {
      s.a.push_back(matrix(as[k], "system.A_samples[" + std::to_string(k) + "]", n, n));
      s.b.push_back(matrix(bs[k], "system.B_samples[" + std::to_string(k) + "]", n, m));
    }
  } else {
    fail("system.kind", "must be one of constant, polynomial, sampled");
  }
  return s;
}

void parse_tolerances(const json& doc, ltv_options& o) {
  if (!doc.contains("tolerances")) return;
  const json& t = doc.at("tolerances");
  if (!t.is_object()) fail("tolerances", "must be an object");
  const std::pair<const char*, double*> fields[] = {
      {"quad_rtol", &o.quad_rtol},         {"quad_atol", &o.quad_atol},
      {"rank_tol", &o.rank_tol},           {"strict_margin", &o.strict_margin},
      {"fac_tol", &o.fac_tol},             {"membership_tol", &o.membership_tol},
      {"blowup_norm", &o.blowup_norm}};
  for (const auto& item : t.items()) {
    const auto it = std::find_if(std::begin(fields), std::end(fields),
                                 [&](const auto& f) { return item.key() == f.first; });
    if (it == std::end(fields)) fail("tolerances." + item.key(), "is not a known tolerance");
    *it->second = number(item.value(), "tolerances." + item.key());
    if (!(*it->second >= 0.0)) fail("tolerances." + item.key(), "must be non-negative");
  }
}

SimulationSpec parse_simulation(const json& doc, std::size_t n) {
  SimulationSpec s;
  if (!doc.contains("simulation")) return s;
  const json& sim = doc.at("simulation");
  if (!sim.is_object()) fail("simulation", "must be an object");
  if (sim.contains("grid")) {
    const json& g = sim.at("grid");
    if (!g.is_number_integer() || g.get<int>() < 2) fail("simulation.grid", "must be an integer >= 2");
    s.grid = g.get<int>();
  }
  if (sim.contains("extra_times")) s.extra_times = vector_of(sim.at("extra_times"), "simulation.extra_times");
  if (sim.contains("tracers")) {
    const json& tr = sim.at("tracers");
    if (!tr.is_array()) fail("simulation.tracers", "must be an array of states");
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const std::string f = "simulation.tracers[" + std::to_string(i) + "]";
      auto x = vector_of(tr[i], f);
      if (x.size() != n) fail(f, "must have length " + std::to_string(n));
      s.tracers.push_back(std::move(x));
    }
  }
  if (sim.contains("mean0")) {
    auto x = vector_of(sim.at("mean0"), "simulation.mean0");
    if (x.size() != n) fail("simulation.mean0", "must have length " + std::to_string(n));
    s.mean0 = std::move(x);
  }
  if (sim.contains("sigma0")) s.sigma0 = matrix(sim.at("sigma0"), "simulation.sigma0", n, n);
  if (sim.contains("allow_open_loop_tail")) {
    if (!sim.at("allow_open_loop_tail").is_boolean()) {
      fail("simulation.allow_open_loop_tail", "must be a boolean");
    }
    s.allow_open_loop_tail = sim.at("allow_open_loop_tail").get<bool>();
  }
  return s;
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) fail("<root>", "must be a JSON object");
  Scenario s;
  ltv_options_default(&s.options);
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) fail("name", "must be a string");
    s.name = doc.at("name").get<std::string>();
  }
  const json& task = member(doc, "task", "task");
  if (!task.is_string()) fail("task", "must be a string");
  s.task = task.get<std::string>();
  const auto& tasks = known_tasks();
  if (std::find(tasks.begin(), tasks.end(), s.task) == tasks.end()) {
    fail("task", "must be one of gramian, partition, check-phi, check-sigma, steer-phi, "
                 "steer-sigma, simulate, example");
  }
  if (doc.contains("seed")) {
    const json& seed = doc.at("seed");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
      fail("seed", "must be a non-negative integer");
    }
    s.options.seed = seed.get<std::uint64_t>();
  }
  parse_tolerances(doc, s.options);
  if (s.task == "example") {
    const json& ex = member(doc, "example", "example");
    if (!ex.is_string() || (ex != "ex1" && ex != "ex2")) fail("example", "must be ex1 or ex2");
    s.example = ex.get<std::string>();
    return s;
  }

  s.system = parse_system(member(doc, "system", "system"));
  const std::size_t n = s.system.n;
  s.horizon = number(member(doc, "horizon", "horizon"), "horizon");
  if (!(s.horizon > 0.0)) fail("horizon", "must be positive");
  if (doc.contains("t_end")) {
    s.t_end = number(doc.at("t_end"), "t_end");
    if (!(*s.t_end > 0.0) || *s.t_end > s.horizon) fail("t_end", "must lie in (0, horizon]");
  }
  if (doc.contains("t_start")) s.t_start = number(doc.at("t_start"), "t_start");
  if (doc.contains("method")) {
    if (!doc.at("method").is_string()) fail("method", "must be a string");
    s.method = doc.at("method").get<std::string>();
  }
  if (doc.contains("partition")) {
    const auto p = vector_of(doc.at("partition"), "partition");
    if (p.size() != 6) fail("partition", "must list six times t0..t5");
    s.partition.emplace();
    std::copy(p.begin(), p.end(), s.partition->begin());
  }

  const json empty = json::object();
  const json& target = doc.contains("target") ? doc.at("target") : empty;
  if (!target.is_object()) fail("target", "must be an object");
  if (target.contains("phi_f")) s.phi_f = matrix(target.at("phi_f"), "target.phi_f", n, n);
  if (target.contains("sigma0")) s.sigma0 = matrix(target.at("sigma0"), "target.sigma0", n, n);
  if (target.contains("sigma_f")) s.sigma_f = matrix(target.at("sigma_f"), "target.sigma_f", n, n);

  if (s.task == "check-phi" || s.task == "steer-phi") {
    if (!s.phi_f) fail("target.phi_f", "is required by task " + s.task);
    if (s.method != "auto" && s.method != "single-rde" && s.method != "five-segment") {
      fail("method", "must be auto, single-rde or five-segment");
    }
  }
  if (s.task == "check-sigma" || s.task == "steer-sigma") {
    if (!s.sigma0) fail("target.sigma0", "is required by task " + s.task);
    if (!s.sigma_f) fail("target.sigma_f", "is required by task " + s.task);
    if (s.task == "steer-sigma" && s.method == "auto") s.method = "general";
    if (s.task == "steer-sigma" && s.method != "general" && s.method != "controllable") {
      fail("method", "must be general or controllable");
    }
  }

  s.simulation = parse_simulation(doc, n);
  if (s.task == "simulate") {
    const json& sched = member(doc, "schedule", "schedule");
    const json& segs = member(sched, "segments", "schedule.segments");
    if (!segs.is_array() || segs.empty()) fail("schedule.segments", "must be a non-empty array");
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const std::string f = "schedule.segments[" + std::to_string(i) + "]";
      SegmentSpec seg;
      seg.start = number(member(segs[i], "start", f + ".start"), f + ".start");
      seg.end = number(member(segs[i], "end", f + ".end"), f + ".end");
      seg.pi0 = matrix(member(segs[i], "pi0", f + ".pi0"), f + ".pi0", n, n);
      s.segments.push_back(std::move(seg));
    }
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot read scenario file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError("scenario file " + path + " is not valid JSON: " + e.what());
  }
  return parse_scenario(doc);
}

System make_system(const Scenario& s) {
  const SystemSpec& sys = s.system;
  std::vector<double> a, b;
  for (const Mat& m : sys.a) a.insert(a.end(), m.v.begin(), m.v.end());
  for (const Mat& m : sys.b) b.insert(b.end(), m.v.begin(), m.v.end());
  ltv_system* raw = nullptr;
  if (sys.kind == "constant") {
    check(ltv_system_create_constant(sys.n, sys.m, a.data(), b.data(), s.horizon, &raw));
  } else if (sys.kind == "polynomial") {
    check(ltv_system_create_polynomial(sys.n, sys.m, sys.a.size(), a.data(), sys.b.size(),
                                       b.data(), s.horizon, &raw));
  } else {
    check(ltv_system_create_sampled(sys.n, sys.m, sys.times.size(), sys.times.data(), a.data(),
                                    b.data(), s.horizon, &raw));
  }
  return System(raw);
}

}  // namespace ltvcli
