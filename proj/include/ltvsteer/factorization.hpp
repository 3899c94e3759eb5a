#pragma once

// Products of five symmetric positive definite factors.

#include <array>
#include <cstdint>

#include "ltvsteer/matcore.hpp"

namespace ltvsteer {

struct FiveFactor {
  // q[0] is applied first: target = q[4] q[3] q[2] q[1] q[0].
  std::array<Matrix, 5> q;
  Matrix target;
  double residual = 0.0;           // ||q5 q4 q3 q2 q1 - target||_F
  double relative_residual = 0.0;  // residual / ||target||_F
  int restarts = 0;                // seeds tried before success
};

struct FactorOptions {
  double fac_tol = 1e-8;
  std::uint64_t seed = 20240611;
  int max_restarts = 20;
  int max_iterations = 400;
  // Largest accepted condition number of a single factor during the search.
  double max_condition = 1e8;
};

// Writes M (det M > 0) as a product of five SPD matrices. SPD input returns
// q1 = M and identities. Throws kNotPositiveDeterminant or, when no seed
// reaches fac_tol, kFactorizationFailed with the best residual.
FiveFactor ballantine5(const Matrix& m, const FactorOptions& options = {});

// Interleaved form M = Qb5 m4 Qb4 m3 Qb3 m2 Qb2 m1 Qb1 with every Qb SPD.
// Returns {Qb1, ..., Qb5}.
struct InterleavedFactor {
  std::array<Matrix, 5> q;
  double residual = 0.0;
  double relative_residual = 0.0;
};
InterleavedFactor interleaved5(const Matrix& m, const std::array<Matrix, 4>& interleavers,
                               const FactorOptions& options = {});

// q[4] m[3] q[3] m[2] q[2] m[1] q[1] m[0] q[0].
Matrix interleaved_product(const std::array<Matrix, 5>& q, const std::array<Matrix, 4>& m);

}  // namespace ltvsteer
