#pragma once

// Dense symmetric / positive-definite matrix primitives.
//
// All routines are pure functions of their arguments. Tolerances named `tol`
// are relative: an eigenvalue is treated as zero when its magnitude is at most
// tol * lambda_max. A negative `tol` selects the numerical-rank default
// n * machine epsilon.

#include <Eigen/Dense>

#include <cstddef>
#include <utility>

namespace ltvsteer {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kUseDefaultTol = -1.0;

// Relative symmetry tolerance used by the NotSymmetric precondition checks.
inline constexpr double kSymmetryTol = 1e-8;

double default_rank_tol(Eigen::Index n);

// Throws kInvalidArgument when any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);
void require_square(const Matrix& m, const char* what);

bool is_symmetric(const Matrix& m, double rel_tol = kSymmetryTol);
Matrix symmetrize(const Matrix& m);

// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};
SymmetricEigen symmetric_eigen(const Matrix& m);

// Principal square root of a symmetric PSD matrix. Eigenvalues in
// [-tol*lambda_max, tol*lambda_max] are clamped to zero.
Matrix spd_sqrt(const Matrix& m, double tol = kUseDefaultTol);

// Square root that clamps every negative eigenvalue to zero without complaint.
// For internal similarity transforms of quadrature output.
Matrix psd_sqrt_clamped(const Matrix& m);

// Inverse principal square root of an SPD matrix.
Matrix spd_inv_sqrt(const Matrix& m);

// Moore-Penrose pseudo-inverse of a symmetric PSD matrix.
Matrix pinv(const Matrix& m, double tol = kUseDefaultTol);

// H = U * blockdiag(bar_h, 0) * U^T with U orthogonal, range columns first.
//
// The range and kernel bases are canonical: they are obtained by pivoted
// Gram-Schmidt on the columns of the corresponding orthogonal projectors, so
// repeated eigenvalues do not make the basis depend on the eigensolver.
struct RangeSplit {
  Matrix u;
  Matrix bar_h;
  Eigen::Index rank = 0;
  double tol_used = 0.0;

  auto range_basis() const { return u.leftCols(rank); }
  auto kernel_basis() const { return u.rightCols(u.cols() - rank); }
};
RangeSplit range_split(const Matrix& h, double tol = kUseDefaultTol);

// Orthogonal projector onto ker(M) for symmetric PSD M.
Matrix kernel_projection(const Matrix& m, double tol = kUseDefaultTol);

// Numerical rank of a symmetric PSD matrix.
Eigen::Index psd_rank(const Matrix& m, double tol = kUseDefaultTol);

// The SPD solution Y of W = Y Q Y, computed as
// W^{1/2} (W^{1/2} Q W^{1/2})^{-1/2} W^{1/2}.
Matrix spd_geometric_solve(const Matrix& w, const Matrix& q);

// True when M is symmetric (relative kSymmetryTol) with lambda_min > rel_tol *
// lambda_max and lambda_max > 0.
bool is_spd(const Matrix& m, double rel_tol = 0.0);

struct SpectrumCheck {
  bool positive = false;
  // Set when some eigenvalue has |imag| >= tol. The products this library
  // tests are similar to symmetric matrices, so this signals bad input.
  bool complex_spectrum = false;
  double min_real = 0.0;
};

// Every eigenvalue has real part > tol and |imag part| < tol.
SpectrumCheck positive_spectrum(const Matrix& m, double tol);

// Spectrum test for I - H * P with H symmetric PSD. When P is symmetric the
// eigenvalues are computed from the similar symmetric matrix
// I - H^{1/2} P H^{1/2}; otherwise a general eigensolve is used.
SpectrumCheck positive_spectrum_shifted_product(const Matrix& h,
                                                const Matrix& p, double tol);

double spectral_norm(const Matrix& m);
double lambda_max_symmetric(const Matrix& m);
double lambda_min_symmetric(const Matrix& m);

// exp(S) for symmetric S, returned exactly symmetric.
Matrix symmetric_exp(const Matrix& s);

// Orthogonal polar factor of a square matrix (M = R * P, R orthogonal, P
// symmetric PSD). Returns {R, P}.
std::pair<Matrix, Matrix> polar_right(const Matrix& m);

}  // namespace ltvsteer
