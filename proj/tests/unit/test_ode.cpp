#include "doctest.h"

#include <cmath>
#include <vector>

#include "ltvsteer/error.hpp"
#include "ltvsteer/ode.hpp"
#include "ltvsteer/system.hpp"

using namespace ltvsteer;

TEST_CASE("exponential growth forwards and backwards") {
  const OdeRhs f = [](double, const Vector& y, Vector& dy) { dy = y; };
  Vector y0(1);
  y0 << 1.0;
  const OdeResult fwd = integrate(f, 0.0, 1.0, y0, OdeOptions{});
  REQUIRE(fwd.status == OdeStatus::kCompleted);
  CHECK(std::abs(fwd.y(0) - std::exp(1.0)) < 1e-9);
  const OdeResult back = integrate(f, 1.0, 0.0, fwd.y, OdeOptions{});
  CHECK(std::abs(back.y(0) - 1.0) < 1e-9);
}

TEST_CASE("tighter tolerances reduce the error") {
  const OdeRhs f = [](double t, const Vector& y, Vector& dy) { dy(0) = std::cos(t) * y(0); };
  Vector y0(1);
  y0 << 1.0;
  double prev = 1.0;
  for (double tol : {1e-6, 1e-9, 1e-12}) {
    OdeOptions opt;
    opt.rtol = opt.atol = tol;
    const OdeResult r = integrate(f, 0.0, 3.0, y0, opt);
    const double err = std::abs(r.y(0) - std::exp(std::sin(3.0)));
    CHECK(err < 100 * tol);
    CHECK(err <= prev);
    prev = err;
  }
}

TEST_CASE("steps land on output times and breakpoints") {
  const OdeRhs f = [](double t, const Vector&, Vector& dy) { dy(0) = std::abs(t - 0.5); };
  const std::vector<double> outputs = {0.0, 0.25, 0.5, 0.75, 1.0};
  const std::vector<double> kinks = {0.5};
  std::vector<double> seen_t, seen_y;
  OdeHooks hooks;
  hooks.breakpoints = kinks;
  hooks.output_times = outputs;
  hooks.observer = [&](double t, const Vector& y) {
    seen_t.push_back(t);
    seen_y.push_back(y(0));
  };
  const OdeResult r = integrate(f, 0.0, 1.0, Vector::Zero(1), OdeOptions{}, hooks);
  REQUIRE(r.status == OdeStatus::kCompleted);
  REQUIRE(seen_t == outputs);
  // Piecewise-quadratic solution is integrated exactly when kinks are honored.
  const std::vector<double> expect = {0.0, 0.09375, 0.125, 0.15625, 0.25};
  for (std::size_t i = 0; i < expect.size(); ++i) CHECK(std::abs(seen_y[i] - expect[i]) < 1e-14);
}

TEST_CASE("finite escape is reported as step underflow or stop") {
  // y' = y^2, y(0) = 1 escapes at t = 1.
  const OdeRhs f = [](double, const Vector& y, Vector& dy) { dy(0) = y(0) * y(0); };
  Vector y0(1);
  y0 << 1.0;
  const OdeResult r = integrate(f, 0.0, 2.0, y0, OdeOptions{});
  CHECK(r.status == OdeStatus::kStepUnderflow);
  CHECK(r.t == doctest::Approx(1.0).epsilon(1e-3));

  OdeHooks hooks;
  hooks.stop = [](double, const Vector& y) { return y(0) > 1e6; };
  const OdeResult s = integrate(f, 0.0, 2.0, y0, OdeOptions{}, hooks);
  CHECK(s.status == OdeStatus::kStopped);
  CHECK(s.t < 1.0);
  CHECK(s.t > 0.999);
}

TEST_CASE("step budget") {
  const OdeRhs f = [](double t, const Vector&, Vector& dy) { dy(0) = std::sin(1000 * t); };
  OdeOptions opt;
  opt.max_steps = 10;
  const OdeResult r = integrate(f, 0.0, 10.0, Vector::Zero(1), opt);
  CHECK(r.status == OdeStatus::kMaxSteps);
}

TEST_CASE("non-finite initial state") {
  Vector y0(1);
  y0 << std::nan("");
  const OdeRhs f = [](double, const Vector& y, Vector& dy) { dy = y; };
  CHECK_THROWS_AS(integrate(f, 0.0, 1.0, y0, OdeOptions{}), Error);
}

TEST_CASE("system evaluators") {
  Matrix a0 = Matrix::Identity(2, 2), a1 = Matrix::Ones(2, 2);
  Matrix b0 = Matrix::Ones(2, 1);
  const LtvSystem poly = LtvSystem::polynomial({a0, a1}, {b0}, 2.0);
  CHECK((poly.a(0.5) - (a0 + 0.5 * a1)).norm() < 1e-15);
  CHECK((poly.b(1.7) - b0).norm() == 0.0);
  CHECK(poly.breakpoints().empty());

  const LtvSystem samp = LtvSystem::sampled({0.0, 1.0, 2.0}, {a0, a1, a0}, {b0, 2 * b0, b0}, 2.0);
  CHECK((samp.a(0.25) - (0.75 * a0 + 0.25 * a1)).norm() < 1e-15);
  CHECK((samp.b(1.5) - 1.5 * b0).norm() < 1e-15);
  REQUIRE(samp.breakpoints().size() == 1);
  CHECK(samp.breakpoints()[0] == 1.0);

  CHECK_THROWS_AS(LtvSystem::constant(Matrix::Identity(2, 2), Matrix::Ones(3, 1), 1.0), Error);
  CHECK_THROWS_AS(LtvSystem::constant(Matrix::Identity(2, 2), Matrix::Ones(2, 1), -1.0), Error);
  CHECK_THROWS_AS(LtvSystem::sampled({0.0, 0.5}, {a0, a0}, {b0, b0}, 1.0), Error);
  CHECK_THROWS_AS(LtvSystem::sampled({0.0, 0.5, 0.5, 1.0}, {a0, a0, a0, a0}, {b0, b0, b0, b0}, 1.0),
                  Error);
}
