#pragma once

// Reachability tests and gain-schedule constructions for the terminal
// transition matrix Phi(T,0) and the terminal covariance Sigma(T).

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ltvsteer/factorization.hpp"
#include "ltvsteer/gramian.hpp"
#include "ltvsteer/riccati.hpp"

namespace ltvsteer {

enum class Construction {
  kSingleRdeSymmetric,
  kSingleRdeNorm,
  kSingleRdeSymmetricPart,
  kFiveSegmentFullRank,
  kFiveSegmentReduced,
  kCovarianceGeneral,
  kCovarianceControllable,
  kExternal,
};

const char* construction_name(Construction c);

// One Riccati segment: Pi solves the RDE on [start, end] from pi_start, and
// the feedback is K(t) = -B(t)^T Pi(t).
struct ScheduleSegment {
  double start = 0.0;
  double end = 0.0;
  Matrix pi_start;
  std::vector<double> times;
  std::vector<Matrix> pi;
  std::vector<Matrix> k;
  double collocation_residual = 0.0;
};

struct GainSchedule {
  std::vector<ScheduleSegment> segments;
  Construction construction = Construction::kExternal;
};

// Solves the RDE on each [starts[i], ends[i]] from pis[i] and samples the
// gain. Raises kRdeEscape when a segment has no solution.
GainSchedule build_schedule(const LtvSystem& sys, const std::vector<double>& starts,
                            const std::vector<double>& ends, const std::vector<Matrix>& pis,
                            Construction construction, const Settings& settings = {});

struct PhiMembership {
  bool member = false;
  Eigen::Index rank = 0;
  RangeSplit split;         // of H(T,0)
  Matrix relative;          // Phi_A(0,T) phi_f
  Matrix w;                 // U^T Phi_A(0,T) phi_f U
  Matrix bar_phi;           // r x r
  Matrix tilde_phi;         // r x (n-r)
  double det_bar_phi = 0.0;
  double lower_left = 0.0;   // ||W_21||_F
  double lower_right = 0.0;  // ||W_22 - I||_F
  double tolerance = 0.0;
  // Invariance of range H under Phi_A(0,T) phi_f, identity on the quotient
  // and orientation on the range, tested with projectors.
  bool geometric_member = false;
};

PhiMembership membership_phi(const LtvSystem& sys, double t_end, const Matrix& phi_f,
                             const Settings& settings = {});

struct SigmaMembership {
  bool member = false;
  Eigen::Index rank = 0;
  Matrix p_g;  // projector onto ker G(T,0)
  Matrix p_h;  // projector onto ker H(T,0)
  // ||P_G (sigma_f - Phi sigma0 Phi^T) P_G||_F and its tolerance.
  double projected_residual = 0.0;
  double tolerance = 0.0;
  // Same test pulled back to time 0 with P_H.
  bool pulled_back_member = false;
  double pulled_back_residual = 0.0;
  double pulled_back_tolerance = 0.0;
};

SigmaMembership membership_sigma(const LtvSystem& sys, double t_end, const Matrix& sigma0,
                                 const Matrix& sigma_f, const Settings& settings = {});

struct PhiSynthesis {
  GainSchedule schedule;
  PhiMembership membership;
  std::optional<Partition> partition;
  std::vector<Matrix> pi_initial;
  // Five-segment paths: the SPD factors and their reconstruction residual.
  std::array<Matrix, 5> factors;
  double factor_residual = 0.0;
};

// Single Riccati segment on [0, T] certified by the symmetric, norm or
// symmetric-part test, in that order. Raises kNoCertificateApplies when none
// holds and kInfeasibleTarget when phi_f is not reachable.
PhiSynthesis synth_phi_single_rde(const LtvSystem& sys, double t_end, const Matrix& phi_f,
                                  const Settings& settings = {});

// Five Riccati segments over a certified partition. When the
// partition is omitted one is searched for. The full-rank construction is
// used when H(T,0) is invertible unless force_reduced is set.
PhiSynthesis synth_phi_five_segment(const LtvSystem& sys, double t_end, const Matrix& phi_f,
                                    const std::optional<Partition>& partition = std::nullopt,
                                    const Settings& settings = {}, bool force_reduced = false);

enum class PhiMethod { kAuto, kSingleRde, kFiveSegment };

// kAuto tries the single-segment certificates and falls back to five segments.
PhiSynthesis synth_phi(const LtvSystem& sys, double t_end, const Matrix& phi_f,
                       PhiMethod method = PhiMethod::kAuto,
                       const std::optional<Partition>& partition = std::nullopt,
                       const Settings& settings = {});

// Symmetric Y with W = (I + N Y) Q (I + Y N) and I + N^{1/2} Y N^{1/2} > 0,
// for N >= 0, Q > 0 and W > 0 agreeing with Q on ker N.
struct CovarianceLift {
  Matrix y;
  Eigen::Index rank = 0;
  double reconstruction_residual = 0.0;  // relative to ||W||_F
  double min_eigenvalue = 0.0;           // of I + N^{1/2} Y N^{1/2}
};
CovarianceLift covariance_lift(const Matrix& n, const Matrix& q, const Matrix& w,
                               double rank_tol = 1e-8);

struct SigmaSynthesis {
  GainSchedule schedule;
  SigmaMembership membership;
  Matrix pi0;
  CovarianceLift lift;
};

SigmaSynthesis synth_sigma(const LtvSystem& sys, double t_end, const Matrix& sigma0,
                           const Matrix& sigma_f, const Settings& settings = {});

// Closed form for controllable pairs. Raises kNotControllable unless H(T,0)
// has full rank.
SigmaSynthesis synth_sigma_controllable(const LtvSystem& sys, double t_end, const Matrix& sigma0,
                                        const Matrix& sigma_f, const Settings& settings = {});

}  // namespace ltvsteer
