#pragma once

// Scenario documents: one JSON object describing a system, a task and its
// targets.
//
//   {
//     "system": {"kind": "constant", "A": [[...]], "B": [[...]]},
//     "horizon": 2.0,
//     "task": "steer-phi",
//     "target": {"phi_f": [[...]]},
//     "tolerances": {"quad_rtol": 1e-10, "fac_tol": 1e-8},
//     "seed": 7
//   }
//
// Polynomial systems give every entry of A and B as a coefficient list in
// ascending degree; sampled systems give {"times", "A_samples", "B_samples"}.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cli/handles.hpp"
#include "json.hpp"

namespace ltvcli {

// Malformed scenario; the message names the offending field.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SystemSpec {
  std::string kind;
  std::size_t n = 0;
  std::size_t m = 0;
  // Row-major blocks: one per coefficient (polynomial) or sample (sampled).
  std::vector<Mat> a;
  std::vector<Mat> b;
  std::vector<double> times;
};

struct SegmentSpec {
  double start = 0.0;
  double end = 0.0;
  Mat pi0;
};

struct SimulationSpec {
  int grid = 600;
  std::vector<double> extra_times;
  std::vector<std::vector<double>> tracers;
  std::optional<std::vector<double>> mean0;
  std::optional<Mat> sigma0;
  bool allow_open_loop_tail = false;
};

struct Scenario {
  std::string name;
  SystemSpec system;
  double horizon = 0.0;
  std::string task;
  std::string example;  // task "example" only
  std::string method = "auto";
  std::optional<Mat> phi_f;
  std::optional<Mat> sigma0;
  std::optional<Mat> sigma_f;
  std::optional<std::array<double, 6>> partition;
  double t_start = 0.0;             // gramian task
  std::optional<double> t_end;      // defaults to the horizon
  std::vector<SegmentSpec> segments;  // simulate task
  SimulationSpec simulation;
  ltv_options options{};
};

inline const std::vector<std::string>& known_tasks() {
  static const std::vector<std::string> tasks = {"gramian",     "partition",  "check-phi",
                                                 "check-sigma", "steer-phi",  "steer-sigma",
                                                 "simulate",    "example"};
  return tasks;
}

Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::string& path);

System make_system(const Scenario& s);

}  // namespace ltvcli
