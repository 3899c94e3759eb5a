#pragma once

#include <array>
#include <span>
#include <vector>

#include "ltvsteer/error.hpp"
#include "ltvsteer/matcore.hpp"
#include "ltvsteer/settings.hpp"
#include "ltvsteer/system.hpp"

namespace ltvsteer {

// Phi_A(t_to, t_from): transition matrix of A(t) from t_from to t_to. Either
// order of the arguments is accepted.
Matrix stm(const LtvSystem& sys, double t_from, double t_to, const OdeOptions& options = {});

// Reachability Gramian G(t_end, t) = int_t^t_end Phi_A(t_end, s) B B^T Phi_A(t_end, s)^T ds.
Matrix reach_gramian(const LtvSystem& sys, double t, double t_end,
                     const OdeOptions& options = {});

struct GramianReport {
  double t = 0.0;
  double t_end = 0.0;
  Matrix g;                // reachability Gramian G(t_end, t)
  Matrix h;                // controllability Gramian H(t_end, t)
  Matrix phi_forward;      // Phi_A(t_end, t)
  Matrix phi_backward;     // Phi_A(t, t_end)
  RangeSplit split;        // of h
  double relation_residual = 0.0;  // ||H - Phi_A(t,T) G Phi_A(t,T)^T||_F / ||H||_F
};

// Controllability Gramian H(t_end, t) together with G and the transition
// matrices, computed in a single co-integrated pass. H and G come from two
// different quadratures and their congruence relation is checked; a residual
// above 100 * rtol raises kRelationViolation.
GramianReport ctrl_gramian(const LtvSystem& sys, double t, double t_end,
                           const Settings& settings = {});

// H(t_k, t) for every t_k in t_ends (ascending, all > t), from one pass.
std::vector<Matrix> ctrl_gramian_path(const LtvSystem& sys, double t,
                                      std::span<const double> t_ends,
                                      const OdeOptions& options = {});

struct Partition {
  std::array<double, 6> times{};
  std::array<GramianReport, 5> segments;
  std::array<Eigen::Index, 5> segment_ranks{};
  Eigen::Index global_rank = 0;
  // Largest ||P_i - P|| between the range projector of
  // Phi_A(0,t_i) H(t_{i+1},t_i) Phi_A(0,t_i)^T and that of H(T,0).
  double range_residual = 0.0;
  bool certified = false;
};

class PartitionNotFound : public Error {
 public:
  PartitionNotFound(const std::string& message, Partition best)
      : Error(ErrorCode::kPartitionNotFound, message), best_(std::move(best)) {}
  const Partition& best_candidate() const { return best_; }

 private:
  Partition best_;
};

// Evaluates a caller-supplied partition 0 = t0 < ... < t5 = t_end.
Partition evaluate_partition(const LtvSystem& sys, const std::array<double, 6>& times,
                             const Settings& settings = {});

// Searches for five consecutive subintervals of [0, t_end] whose Gramians all
// carry the rank of H(t_end, 0). Tries the uniform split first, then a greedy
// earliest-full-rank sweep on dyadic grids of depth 3..6.
Partition find_partition(const LtvSystem& sys, double t_end, const Settings& settings = {});

}  // namespace ltvsteer
