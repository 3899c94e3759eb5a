#include "ltvsteer/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ltvsteer/error.hpp"

namespace ltvsteer {

namespace {

double resolve_tol(double tol, Eigen::Index n) {
  return tol < 0.0 ? default_rank_tol(n) : tol;
}

void require_symmetric(const Matrix& m, const char* what) {
  require_square(m, what);
  if (!is_symmetric(m)) {
    throw Error(ErrorCode::kNotSymmetric, std::string(what) + " is not symmetric");
  }
}

double max_abs(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Pivoted modified Gram-Schmidt over the columns of a projector. Picks the
// column with the largest remaining norm; near-ties go to the lowest index.
Matrix orthonormal_columns(const Matrix& projector, Eigen::Index count) {
  const Eigen::Index n = projector.rows();
  Matrix basis(n, count);
  Matrix work = projector;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Eigen::Index k = 0; k < count; ++k) {
    double best = -1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!used[static_cast<std::size_t>(j)]) best = std::max(best, work.col(j).norm());
    }
    Eigen::Index pick = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!used[static_cast<std::size_t>(j)] && work.col(j).norm() >= (1.0 - 1e-8) * best) {
        pick = j;
        break;
      }
    }
    used[static_cast<std::size_t>(pick)] = true;
    Vector v = work.col(pick);
    // Second pass against the accepted vectors keeps orthogonality at eps.
    for (Eigen::Index i = 0; i < k; ++i) v -= basis.col(i).dot(v) * basis.col(i);
    v.normalize();
    basis.col(k) = v;
    for (Eigen::Index j = 0; j < n; ++j) {
      work.col(j) -= v.dot(work.col(j)) * v;
    }
  }
  return basis;
}

}  // namespace

double default_rank_tol(Eigen::Index n) {
  return static_cast<double>(std::max<Eigen::Index>(n, 1)) *
         std::numeric_limits<double>::epsilon();
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " has non-finite entries");
  }
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " is not square");
  }
  require_finite(m, what);
}

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.norm());
  return (m - m.transpose()).norm() <= rel_tol * scale;
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

SymmetricEigen symmetric_eigen(const Matrix& m) {
  if (m.rows() == 0) return {Vector(0), Matrix(0, 0)};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(m));
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kInvalidArgument, "symmetric eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix spd_sqrt(const Matrix& m, double tol) {
  require_symmetric(m, "spd_sqrt input");
  const Eigen::Index n = m.rows();
  if (n == 0) return m;
  const auto eig = symmetric_eigen(m);
  const double lmax = max_abs(eig.values);
  const double cut = resolve_tol(tol, n) * lmax;
  Vector root(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lambda = eig.values(i);
    if (lambda < -cut) {
      throw Error(ErrorCode::kIndefiniteBeyondTolerance,
                  "eigenvalue " + std::to_string(lambda) + " below tolerance");
    }
    root(i) = lambda <= cut ? 0.0 : std::sqrt(lambda);
  }
  return symmetrize(eig.vectors * root.asDiagonal() * eig.vectors.transpose());
}

Matrix psd_sqrt_clamped(const Matrix& m) {
  require_square(m, "psd_sqrt_clamped input");
  if (m.rows() == 0) return m;
  const auto eig = symmetric_eigen(m);
  const Vector root = eig.values.cwiseMax(0.0).cwiseSqrt();
  return symmetrize(eig.vectors * root.asDiagonal() * eig.vectors.transpose());
}

Matrix spd_inv_sqrt(const Matrix& m) {
  require_symmetric(m, "spd_inv_sqrt input");
  const Eigen::Index n = m.rows();
  if (n == 0) return m;
  const auto eig = symmetric_eigen(m);
  if (eig.values(0) <= 0.0) {
    throw Error(ErrorCode::kNotPositiveDefinite, "spd_inv_sqrt input is not positive definite");
  }
  const Vector inv_root = eig.values.cwiseSqrt().cwiseInverse();
  return symmetrize(eig.vectors * inv_root.asDiagonal() * eig.vectors.transpose());
}

Matrix pinv(const Matrix& m, double tol) {
  require_symmetric(m, "pinv input");
  const Eigen::Index n = m.rows();
  if (n == 0) return m;
  const auto eig = symmetric_eigen(m);
  const double cut = resolve_tol(tol, n) * max_abs(eig.values);
  Vector inv = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (eig.values(i) > cut && eig.values(i) > 0.0) inv(i) = 1.0 / eig.values(i);
  }
  return symmetrize(eig.vectors * inv.asDiagonal() * eig.vectors.transpose());
}

RangeSplit range_split(const Matrix& h, double tol) {
  require_symmetric(h, "range_split input");
  const Eigen::Index n = h.rows();
  RangeSplit out;
  out.tol_used = resolve_tol(tol, n);
  if (n == 0) {
    out.u = Matrix(0, 0);
    out.bar_h = Matrix(0, 0);
    return out;
  }
  const auto eig = symmetric_eigen(h);
  const double cut = out.tol_used * max_abs(eig.values);
  std::vector<Eigen::Index> range_idx;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    if (eig.values(i) > cut && eig.values(i) > 0.0) range_idx.push_back(i);
  }
  const auto r = static_cast<Eigen::Index>(range_idx.size());
  Matrix range_vecs(n, r);
  for (Eigen::Index k = 0; k < r; ++k) {
    range_vecs.col(k) = eig.vectors.col(range_idx[static_cast<std::size_t>(k)]);
  }
  const Matrix p_range = range_vecs * range_vecs.transpose();
  const Matrix p_kernel = Matrix::Identity(n, n) - p_range;
  out.u.resize(n, n);
  out.u.leftCols(r) = orthonormal_columns(p_range, r);
  out.u.rightCols(n - r) = orthonormal_columns(p_kernel, n - r);
  out.rank = r;
  out.bar_h = symmetrize(out.u.leftCols(r).transpose() * symmetrize(h) * out.u.leftCols(r));
  return out;
}

Matrix kernel_projection(const Matrix& m, double tol) {
  const RangeSplit split = range_split(m, tol);
  const auto kernel = split.kernel_basis();
  return symmetrize(kernel * kernel.transpose());
}

Eigen::Index psd_rank(const Matrix& m, double tol) { return range_split(m, tol).rank; }

Matrix spd_geometric_solve(const Matrix& w, const Matrix& q) {
  require_symmetric(w, "W");
  require_symmetric(q, "Q");
  if (w.rows() != q.rows()) {
    throw Error(ErrorCode::kInvalidArgument, "W and Q differ in size");
  }
  if (!is_spd(w) || !is_spd(q)) {
    throw Error(ErrorCode::kNotPositiveDefinite, "W and Q must be positive definite");
  }
  const Matrix w_half = spd_sqrt(w);
  const Matrix inner = symmetrize(w_half * q * w_half);
  return symmetrize(w_half * spd_inv_sqrt(inner) * w_half);
}

bool is_spd(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols() || !m.allFinite() || !is_symmetric(m)) return false;
  if (m.rows() == 0) return true;
  const auto eig = symmetric_eigen(m);
  const double lmax = eig.values(eig.values.size() - 1);
  return lmax > 0.0 && eig.values(0) > rel_tol * lmax;
}

SpectrumCheck positive_spectrum(const Matrix& m, double tol) {
  require_square(m, "positive_spectrum input");
  SpectrumCheck out;
  if (m.rows() == 0) {
    out.positive = true;
    out.min_real = std::numeric_limits<double>::infinity();
    return out;
  }
  Eigen::EigenSolver<Matrix> solver(m, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kInvalidArgument, "eigensolver did not converge");
  }
  const auto& values = solver.eigenvalues();
  out.min_real = values.real().minCoeff();
  out.complex_spectrum = values.imag().cwiseAbs().maxCoeff() >= tol;
  out.positive = out.min_real > tol && !out.complex_spectrum;
  return out;
}

SpectrumCheck positive_spectrum_shifted_product(const Matrix& h, const Matrix& p,
                                                double tol) {
  require_symmetric(h, "H");
  require_square(p, "Pi");
  const Eigen::Index n = h.rows();
  const Matrix identity = Matrix::Identity(n, n);
  if (!is_symmetric(p)) return positive_spectrum(identity - h * p, tol);
  const Matrix h_half = psd_sqrt_clamped(h);
  SpectrumCheck out;
  if (n == 0) {
    out.positive = true;
    out.min_real = std::numeric_limits<double>::infinity();
    return out;
  }
  out.min_real = lambda_min_symmetric(identity - h_half * symmetrize(p) * h_half);
  out.positive = out.min_real > tol;
  return out;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double lambda_max_symmetric(const Matrix& m) {
  if (m.rows() == 0) return -std::numeric_limits<double>::infinity();
  const auto eig = symmetric_eigen(m);
  return eig.values(eig.values.size() - 1);
}

double lambda_min_symmetric(const Matrix& m) {
  if (m.rows() == 0) return std::numeric_limits<double>::infinity();
  return symmetric_eigen(m).values(0);
}

Matrix symmetric_exp(const Matrix& s) {
  if (s.rows() == 0) return s;
  const auto eig = symmetric_eigen(s);
  const Vector e = eig.values.array().exp().matrix();
  return symmetrize(eig.vectors * e.asDiagonal() * eig.vectors.transpose());
}

std::pair<Matrix, Matrix> polar_right(const Matrix& m) {
  require_square(m, "polar input");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix& u = svd.matrixU();
  const Matrix& v = svd.matrixV();
  Matrix r = u * v.transpose();
  Matrix p = symmetrize(v * svd.singularValues().asDiagonal() * v.transpose());
  return {r, p};
}

}  // namespace ltvsteer
