#pragma once

// Independent closed-loop re-simulation of gain schedules.

#include <optional>
#include <vector>

#include "ltvsteer/synthesis.hpp"

namespace ltvsteer {

struct SimulationOptions {
  // Uniform samples on [0, T]; segment boundaries and extra_times are added.
  int grid = 600;
  std::vector<double> extra_times;
  std::optional<Matrix> sigma0;
  std::vector<Vector> tracers;
  // End of the simulated interval; defaults to the system horizon.
  std::optional<double> t_end;
  // When the schedule stops short of t_end, continue open loop instead of
  // raising kScheduleGap.
  bool allow_open_loop_tail = false;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<int> segment;  // schedule segment of each sample, -1 for open loop
  std::vector<Matrix> phi;
  std::vector<Matrix> sigma;                // empty unless sigma0 was given
  std::vector<std::vector<Vector>> tracers;  // tracers[sample][tracer]
  Matrix phi_terminal;
  double min_det = 0.0;
  bool det_positive = false;
  double max_sigma_asymmetry = 0.0;
  bool schedule_complete = true;
};

// Co-integrates Pi and Phi' = (A - B B^T Pi) Phi segment by segment from the
// stored initial values; stored gain samples are never interpolated.
Trajectory simulate(const LtvSystem& sys, const GainSchedule& schedule,
                    const SimulationOptions& options = {}, const Settings& settings = {});

struct SteeringReport {
  Matrix target;
  Matrix achieved;
  double residual = 0.0;           // ||achieved - target||_F
  double relative_residual = 0.0;  // residual / ||target||_F
  bool det_positive = false;
  double min_det = 0.0;
  bool schedule_complete = true;
  Trajectory trajectory;
};

SteeringReport verify_phi(const LtvSystem& sys, const GainSchedule& schedule, const Matrix& phi_f,
                          SimulationOptions options = {}, const Settings& settings = {});

SteeringReport verify_sigma(const LtvSystem& sys, const GainSchedule& schedule,
                            const Matrix& sigma0, const Matrix& sigma_f,
                            SimulationOptions options = {}, const Settings& settings = {});

// Principal semi-axes of the scale-sigma ellipsoid of a covariance, as
// columns ordered by decreasing length.
Matrix covariance_axes(const Matrix& sigma, double scale = 3.0);

}  // namespace ltvsteer
