#include "doctest.h"

#include <numbers>

#include "ltvsteer/harness.hpp"
#include "ltvsteer/synthesis.hpp"
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

// Members of the reachable set of a rank-deficient system: U [[Xb, Xt],[0, I]] U^T
// relative to the free motion.
Matrix sample_member(oracle::Gen& gen, const Matrix& u, Eigen::Index r, const Matrix& phi_a) {
  const Eigen::Index n = u.rows();
  Matrix w = Matrix::Identity(n, n);
  w.topLeftCorner(r, r) = gen.glplus(r, 0.5, 2.0);
  w.topRightCorner(r, n - r) = gen.normal(r, n - r, 0.5);
  return phi_a * u * w * u.transpose();
}

}  // namespace

TEST_CASE("membership of the rotating example") {
  const LtvSystem sys = rotating_example();
  const Matrix phi_f = rotating_target(sys);
  const PhiMembership m = membership_phi(sys, 2.0, phi_f);
  CHECK(m.member);
  CHECK(m.geometric_member);
  CHECK(m.rank == 2);
  CHECK(m.det_bar_phi == doctest::Approx(3.24).epsilon(1e-8));

  Matrix off = phi_f;
  off(2, 2) *= 2.0;  // stretches the uncontrollable direction
  const PhiMembership o = membership_phi(sys, 2.0, off);
  CHECK_FALSE(o.member);
  CHECK_FALSE(o.geometric_member);
  CHECK(o.lower_right > 0.1);

  Matrix flip = Matrix::Identity(3, 3);
  flip(0, 0) = -1;
  flip(2, 2) = -1;  // det > 0 overall, both blocks fail
  CHECK_FALSE(membership_phi(sys, 2.0, oracle::expm(sys.a(0.0) * 2.0) * flip).member);

  Matrix reflect = Matrix::Identity(3, 3);
  reflect(0, 0) = -1;
  CHECK_THROWS_AS(membership_phi(sys, 2.0, reflect), Error);
}

TEST_CASE("group property of the reachable set") {
  oracle::Gen gen(51);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = gen.integer(2, 4);
    const Eigen::Index m = gen.integer(1, 2);
    // Uncontrollable block structure so that the rank is r < n.
    const Eigen::Index r = gen.integer(1, static_cast<int>(n) - 1);
    Matrix a = gen.normal(n, n, 0.5);
    a.bottomLeftCorner(n - r, r).setZero();
    Matrix b = Matrix::Zero(n, m);
    b.topRows(r) = gen.normal(r, m);
    const Matrix q = gen.orthogonal(n);
    const LtvSystem sys = LtvSystem::constant(q * a * q.transpose(), q * b, 1.0);
    const GramianReport gr = ctrl_gramian(sys, 0.0, 1.0);
    const Eigen::Index rank = gr.split.rank;
    const Matrix f1 = sample_member(gen, gr.split.u, rank, gr.phi_forward);
    const Matrix f2 = sample_member(gen, gr.split.u, rank, gr.phi_forward);
    REQUIRE(membership_phi(sys, 1.0, f1).member);
    REQUIRE(membership_phi(sys, 1.0, f2).member);
    const Matrix prod = gr.phi_forward * (gr.phi_backward * f1) * (gr.phi_backward * f2);
    CHECK(membership_phi(sys, 1.0, prod).member);
    const Matrix inv = gr.phi_forward * (gr.phi_backward * f1).inverse();
    CHECK(membership_phi(sys, 1.0, inv).member);
  }
}

TEST_CASE("single segment: zero target and round trip") {
  oracle::Gen gen(52);
  const LtvSystem sys = LtvSystem::constant(gen.normal(3, 3, 0.5), gen.normal(3, 2), 1.0);
  const Matrix phi_a = stm(sys, 0.0, 1.0);
  const PhiSynthesis zero = synth_phi_single_rde(sys, 1.0, phi_a);
  CHECK(zero.pi_initial[0].norm() < 1e-8);
  for (const Matrix& k : zero.schedule.segments[0].k) CHECK(k.norm() < 1e-7);

  const Matrix h = ctrl_gramian(sys, 0.0, 1.0).h;
  const Matrix pi0 = 0.1 * Matrix::Identity(3, 3);
  const Matrix phi_f = phi_a * (Matrix::Identity(3, 3) - h * pi0);
  const PhiSynthesis s = synth_phi_single_rde(sys, 1.0, phi_f);
  CHECK(s.schedule.construction == Construction::kSingleRdeSymmetric);
  CHECK((s.pi_initial[0] - pi0).norm() < 1e-7);
  const SteeringReport rep = verify_phi(sys, s.schedule, phi_f);
  CHECK(rep.relative_residual < 1e-7);

  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = gen.integer(1, 4);
    const LtvSystem t = LtvSystem::constant(gen.normal(n, n, 0.5), gen.normal(n, 2), 1.0);
    const GramianReport gr = ctrl_gramian(t, 0.0, 1.0);
    const Matrix p = (gen.coin() ? gen.symmetric(n) : gen.normal(n, n)) *
                     (0.3 / std::max(1.0, gr.h.norm()));
    if (certify_existence(gr.h, p) == ExistenceCertificate::kNone) continue;
    const Matrix target = stm_closed_form(t, p, 0.0, 1.0);
    const PhiSynthesis back = synth_phi_single_rde(t, 1.0, target);
    // Recovered on the range of H only.
    CHECK((gr.h * (back.pi_initial[0] - p)).norm() < 1e-7);
    CHECK(verify_phi(t, back.schedule, target).relative_residual < 1e-6);
  }
}

TEST_CASE("large rotation has no single-segment certificate") {
  const LtvSystem sys = LtvSystem::constant(Matrix::Zero(2, 2), Matrix::Identity(2, 2), 1.0);
  const Matrix rot = oracle::rotation2(std::numbers::pi / 2);
  const Matrix pi0 = Matrix::Identity(2, 2) - rot;
  CHECK_FALSE(exists_norm(Matrix::Identity(2, 2), pi0));
  CHECK_FALSE(exists_sympart(Matrix::Identity(2, 2), pi0));
  try {
    synth_phi_single_rde(sys, 1.0, rot);
    FAIL("expected NoCertificateApplies");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoCertificateApplies);
  }
  const PhiSynthesis fallback = synth_phi(sys, 1.0, rot);
  CHECK(fallback.schedule.segments.size() == 5);
  CHECK(verify_phi(sys, fallback.schedule, rot).relative_residual < 1e-6);
}

TEST_CASE("gain continuity inside a certificate region") {
  oracle::Gen gen(53);
  const LtvSystem sys = LtvSystem::constant(gen.normal(2, 2, 0.5), gen.normal(2, 2), 1.0);
  const Matrix h = ctrl_gramian(sys, 0.0, 1.0).h;
  const Matrix target = stm_closed_form(sys, 0.2 * gen.normal(2, 2) / h.norm(), 0.0, 1.0);
  const Matrix dir = gen.normal(2, 2);
  const double delta = 1e-6;
  const PhiSynthesis a = synth_phi_single_rde(sys, 1.0, target);
  const PhiSynthesis b = synth_phi_single_rde(sys, 1.0, target + delta * dir);
  REQUIRE(a.schedule.construction == b.schedule.construction);
  double worst = 0.0;
  const auto& ka = a.schedule.segments[0].k;
  const auto& kb = b.schedule.segments[0].k;
  for (std::size_t i = 0; i < ka.size(); ++i) worst = std::max(worst, (ka[i] - kb[i]).norm());
  CHECK(worst > 0.0);
  CHECK(worst < 1e3 * delta);
}

TEST_CASE("five segments: identity and random targets") {
  // Single-input pairs need longer segments before the segment Gramians
  // clear the rank tolerance.
  oracle::Gen gen(54);
  for (int trial = 0; trial < 6; ++trial) {
    const bool single = trial % 2 == 1;
    const double t_end = single ? 5.0 : 1.0;
    const LtvSystem sys =
        LtvSystem::constant(gen.normal(3, 3, 0.3), gen.normal(3, single ? 1 : 2), t_end);
    const Matrix phi_a = stm(sys, 0.0, t_end);
    const PhiSynthesis id = synth_phi_five_segment(sys, t_end, phi_a);
    CHECK(id.schedule.construction == Construction::kFiveSegmentFullRank);
    CHECK(verify_phi(sys, id.schedule, phi_a).relative_residual < 1e-6);
    const Matrix target = gen.glplus(3, 0.5, 2.0);
    const PhiSynthesis s = synth_phi_five_segment(sys, t_end, target);
    CHECK(s.factor_residual <= 1e-8);
    CHECK(verify_phi(sys, s.schedule, target).relative_residual < 1e-5);
    // The reduced construction also applies with r = n.
    const PhiSynthesis red = synth_phi_five_segment(sys, t_end, target, std::nullopt, {}, true);
    CHECK(red.schedule.construction == Construction::kFiveSegmentReduced);
    CHECK(verify_phi(sys, red.schedule, target).relative_residual < 1e-5);
  }
}

TEST_CASE("five segments on the rotating example") {
  const LtvSystem sys = rotating_example();
  const Matrix phi_f = rotating_target(sys);
  const PhiSynthesis s = synth_phi_five_segment(sys, 2.0, phi_f);
  CHECK(s.schedule.construction == Construction::kFiveSegmentReduced);
  REQUIRE(s.partition);
  CHECK(s.partition->certified);
  const SteeringReport rep = verify_phi(sys, s.schedule, phi_f);
  CHECK(rep.residual <= 1e-4);
  CHECK(rep.det_positive);

  Partition bad = *s.partition;
  bad.certified = false;
  CHECK_THROWS_AS(synth_phi_five_segment(sys, 2.0, phi_f, bad), Error);
  Matrix off = phi_f;
  off(2, 0) += 1e-2;
  try {
    synth_phi(sys, 2.0, off);
    FAIL("expected InfeasibleTarget");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInfeasibleTarget);
  }
}

TEST_CASE("covariance lift") {
  const Matrix i2 = Matrix::Identity(2, 2);
  const CovarianceLift trivial = covariance_lift(i2, i2, 4 * i2);
  CHECK((trivial.y - i2).norm() < 1e-12);  // (I + Y)^2 = 4I

  oracle::Gen gen(55);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = gen.integer(1, 5);
    const Eigen::Index r = gen.integer(0, static_cast<int>(n));
    const Matrix nm = gen.psd(n, r, 0.3, 2.0);
    const Matrix q = gen.spd(n);
    // W in the image of the parameterization.
    const Matrix nh = oracle::sqrtm_sym(nm);
    Matrix y = gen.symmetric(n, 0.3);
    const Matrix id = Matrix::Identity(n, n);
    Eigen::SelfAdjointEigenSolver<Matrix> es(id + nh * y * nh);
    if (es.eigenvalues()(0) < 0.05) continue;
    const Matrix w = (id + nm * y) * q * (id + y * nm);
    const CovarianceLift lift = covariance_lift(nm, q, 0.5 * (w + w.transpose()), 1e-10);
    CHECK(lift.rank == r);
    CHECK(lift.reconstruction_residual <= 1e-8);
    CHECK(lift.min_eigenvalue > 0.0);
    CHECK((lift.y - lift.y.transpose()).norm() == 0.0);
  }
}

TEST_CASE("covariance steering on the two-state example") {
  Matrix a(2, 2);
  a << 0.2, 0.8, 0, 0.3;
  Matrix b(2, 1);
  b << 1, 0;
  const LtvSystem sys = LtvSystem::constant(a, b, 1.0);
  const Matrix s0 = Matrix::Identity(2, 2);
  Matrix sf = Matrix::Zero(2, 2);
  sf(0, 0) = 0.2;
  sf(1, 1) = std::exp(0.6);
  const SigmaMembership m = membership_sigma(sys, 1.0, s0, sf);
  CHECK(m.member);
  CHECK(m.pulled_back_member);
  const SigmaSynthesis s = synth_sigma(sys, 1.0, s0, sf);
  const SteeringReport rep = verify_sigma(sys, s.schedule, s0, sf);
  CHECK(rep.residual < 4.5e-6);

  Matrix off = sf;
  off(1, 1) += 0.1;
  CHECK_FALSE(membership_sigma(sys, 1.0, s0, off).member);
  CHECK_FALSE(membership_sigma(sys, 1.0, s0, off).pulled_back_member);
  CHECK_THROWS_AS(synth_sigma(sys, 1.0, s0, off), Error);
  CHECK_THROWS_AS(synth_sigma_controllable(sys, 1.0, s0, sf), Error);

  // Free motion needs no control.
  const Matrix phi = oracle::expm(a);
  const SigmaSynthesis free = synth_sigma(sys, 1.0, s0, phi * phi.transpose());
  CHECK(free.pi0.norm() < 1e-7);
}

TEST_CASE("controllable closed form") {
  const LtvSystem scalar = LtvSystem::constant(Matrix::Zero(1, 1), Matrix::Ones(1, 1), 1.0);
  const Matrix one = Matrix::Ones(1, 1);
  const SigmaSynthesis s = synth_sigma_controllable(scalar, 1.0, one, 4 * one);
  CHECK(std::abs(s.pi0(0, 0) + 1.0) < 1e-10);
  CHECK(verify_sigma(scalar, s.schedule, one, 4 * one).residual < 1e-8);

  oracle::Gen gen(56);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = gen.integer(1, 3);
    const LtvSystem sys = LtvSystem::constant(gen.normal(n, n, 0.5), gen.normal(n, n), 1.0);
    const Matrix s0 = gen.spd(n, 0.5, 2.0);
    const Matrix sf = gen.spd(n, 0.5, 2.0);
    const SigmaSynthesis c = synth_sigma_controllable(sys, 1.0, s0, sf);
    const SigmaSynthesis g = synth_sigma(sys, 1.0, s0, sf);
    const SteeringReport rc = verify_sigma(sys, c.schedule, s0, sf);
    const SteeringReport rg = verify_sigma(sys, g.schedule, s0, sf);
    CHECK(rc.residual < 1e-6);
    CHECK((rc.achieved - rg.achieved).norm() < 1e-7);
  }
}
