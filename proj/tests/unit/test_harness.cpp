#include "doctest.h"

#include <numbers>

#include "ltvsteer/harness.hpp"
#include "support/oracles.hpp"

using namespace ltvsteer;

namespace {

LtvSystem rotating_example() {
  const double w = std::numbers::pi / 4;
  Matrix a(3, 3);
  a << 0, -w, 0, w, 0, 0, 0, 0, -0.43;
  Matrix b(3, 2);
  b << 1, 0, 0, 1, 0, 0;
  return LtvSystem::constant(a, b, 2.0);
}

Matrix rotating_target(const LtvSystem& sys) {
  Matrix inner = Matrix::Identity(3, 3);
  inner.topLeftCorner(2, 2) = oracle::rotation2(std::numbers::pi / 2, 1.8);
  inner(0, 2) = 0.3;
  inner(1, 2) = -0.2;
  return oracle::expm(sys.a(0.0) * 2.0) * inner;
}

}  // namespace

TEST_CASE("zero gain reproduces the free motion") {
  oracle::Gen gen(61);
  const Matrix a = gen.normal(3, 3, 0.5);
  const LtvSystem sys = LtvSystem::constant(a, gen.normal(3, 2), 1.0);
  const GainSchedule zero = build_schedule(sys, {0.0}, {1.0}, {Matrix::Zero(3, 3)},
                                           Construction::kExternal);
  const Trajectory tr = simulate(sys, zero);
  CHECK((tr.phi_terminal - oracle::expm(a)).norm() < 1e-9);
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times.back() == 1.0);
  CHECK(tr.times.size() == 600);
  CHECK(tr.det_positive);
  CHECK(tr.schedule_complete);
}

TEST_CASE("closed loop against a fixed-step oracle") {
  oracle::Gen gen(62);
  const LtvSystem sys = LtvSystem::constant(gen.normal(2, 2, 0.5), gen.normal(2, 1), 1.0);
  const Matrix pi0 = 0.2 * gen.symmetric(2);
  const GainSchedule s = build_schedule(sys, {0.0, 0.5}, {0.5, 1.0}, {pi0, -pi0},
                                        Construction::kExternal);
  const Trajectory tr = simulate(sys, s);
  const auto af = [&](double t) { return sys.a(t); };
  const auto bf = [&](double t) { return sys.b(t); };
  const Matrix first = oracle::rk4_closed_loop(af, bf, pi0, 0.0, 0.5, 2000);
  const Matrix second = oracle::rk4_closed_loop(af, bf, -pi0, 0.5, 1.0, 2000);
  CHECK((tr.phi_terminal - second * first).norm() < 1e-8);
  // Segment boundaries are recorded once.
  int at_half = 0;
  for (double t : tr.times) at_half += t == 0.5;
  CHECK(at_half == 1);
}

TEST_CASE("truncated schedule") {
  const LtvSystem sys = rotating_example();
  const Matrix phi_f = rotating_target(sys);
  const PhiSynthesis full = synth_phi_five_segment(sys, 2.0, phi_f);
  GainSchedule cut = full.schedule;
  cut.segments.pop_back();
  CHECK_THROWS_AS(simulate(sys, cut), Error);
  const SteeringReport rep = verify_phi(sys, cut, phi_f);
  CHECK_FALSE(rep.schedule_complete);
  CHECK(rep.residual > 1e-2);

  GainSchedule gap = full.schedule;
  gap.segments.erase(gap.segments.begin() + 2);
  try {
    simulate(sys, gap);
    FAIL("expected ScheduleGap");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kScheduleGap);
  }
}

TEST_CASE("rotating example trajectory") {
  const LtvSystem sys = rotating_example();
  const Matrix phi_f = rotating_target(sys);
  const PhiSynthesis s = synth_phi_five_segment(sys, 2.0, phi_f);
  SimulationOptions opt;
  opt.tracers = {Vector::Unit(3, 0), Vector::Unit(3, 1), Vector::Unit(3, 2)};
  opt.sigma0 = Matrix::Identity(3, 3);
  const Trajectory tr = simulate(sys, s.schedule, opt);
  CHECK((tr.phi_terminal - phi_f).norm() <= 1e-4);
  CHECK(tr.det_positive);
  CHECK(tr.max_sigma_asymmetry <= 1e-10);
  // The third state is not reachable and decays open loop.
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    CHECK(std::abs(tr.tracers[k][2](2) - std::exp(-0.43 * tr.times[k])) < 1e-6);
    CHECK((tr.sigma[k] - tr.phi[k] * tr.phi[k].transpose()).norm() < 1e-8 * tr.sigma[k].norm());
  }
}

TEST_CASE("covariance axes") {
  Matrix s = Matrix::Zero(2, 2);
  s(0, 0) = 1.0;
  s(1, 1) = 4.0;
  const Matrix ax = covariance_axes(s, 3.0);
  CHECK(ax.col(0).norm() == doctest::Approx(6.0));
  CHECK(ax.col(1).norm() == doctest::Approx(3.0));
  CHECK(std::abs(ax(0, 0)) < 1e-14);
  Matrix ns = s;
  ns(0, 1) = 0.5;
  CHECK_THROWS_AS(covariance_axes(ns), Error);
}

TEST_CASE("simulation input validation") {
  const LtvSystem sys = rotating_example();
  const GainSchedule zero = build_schedule(sys, {0.0}, {2.0}, {Matrix::Zero(3, 3)},
                                           Construction::kExternal);
  SimulationOptions opt;
  opt.sigma0 = -Matrix::Identity(3, 3);
  CHECK_THROWS_AS(simulate(sys, zero, opt), Error);
  opt.sigma0.reset();
  opt.tracers = {Vector::Ones(2)};
  CHECK_THROWS_AS(simulate(sys, zero, opt), Error);
  opt.tracers.clear();
  opt.t_end = 3.0;
  CHECK_THROWS_AS(simulate(sys, zero, opt), Error);
}
