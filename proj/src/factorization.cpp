#include "ltvsteer/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "ltvsteer/error.hpp"

namespace ltvsteer {

namespace {

// Orthonormal basis of the symmetric n x n matrices.
std::vector<Matrix> symmetric_basis(Eigen::Index n) {
  std::vector<Matrix> basis;
  const double w = 1.0 / std::sqrt(2.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = j; k < n; ++k) {
      Matrix b = Matrix::Zero(n, n);
      if (j == k) {
        b(j, j) = 1.0;
      } else {
        b(j, k) = w;
        b(k, j) = w;
      }
      basis.push_back(std::move(b));
    }
  }
  return basis;
}

struct ExpFactor {
  Matrix value;
  Matrix vectors;
  Matrix divided;  // divided differences of exp over the eigenvalues
};

ExpFactor exp_factor(const Matrix& s) {
  const SymmetricEigen eig = symmetric_eigen(s);
  const Eigen::Index n = s.rows();
  ExpFactor f;
  f.vectors = eig.vectors;
  const Vector e = eig.values.array().exp().matrix();
  f.value = symmetrize(eig.vectors * e.asDiagonal() * eig.vectors.transpose());
  f.divided.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double lj = eig.values(j);
      const double lk = eig.values(k);
      const double d = lj - lk;
      f.divided(j, k) = std::abs(d) < 1e-10 * std::max(1.0, std::abs(lj))
                            ? std::exp(0.5 * (lj + lk))
                            : std::expm1(d) / d * std::exp(lk);
    }
  }
  return f;
}

std::string format_sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

double eigen_spread(const Matrix& s) {
  const Vector v = symmetric_eigen(s).values;
  return v(v.size() - 1) - v(0);
}

Matrix symmetric_log(const Matrix& p) {
  const SymmetricEigen eig = symmetric_eigen(p);
  const Vector l = eig.values.array().log().matrix();
  return symmetrize(eig.vectors * l.asDiagonal() * eig.vectors.transpose());
}

Matrix random_symmetric(Eigen::Index n, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) m(j, k) = normal(rng);
  }
  return symmetrize(m);
}

using Factors = std::array<Matrix, 5>;
using Links = std::array<Matrix, 4>;

Matrix product(const Factors& e) { return e[4] * e[3] * e[2] * e[1] * e[0]; }

Links identity_links(Eigen::Index n) {
  Links l;
  for (Matrix& x : l) x = Matrix::Identity(n, n);
  return l;
}

struct SearchResult {
  Factors s;
  double residual = std::numeric_limits<double>::infinity();
};

// Levenberg-Marquardt on exp-parameterised factors with minimum-norm steps
// (the system is underdetermined: 5 n(n+1)/2 unknowns, n^2 equations). The
// model is e5 l4 e4 l3 e3 l2 e2 l1 e1 with fixed links l.
SearchResult levenberg_marquardt(const Matrix& target, Factors s, const FactorOptions& options,
                                 const std::vector<Matrix>& basis, const Links& links) {
  const Eigen::Index n = target.rows();
  const Eigen::Index n2 = n * n;
  const auto p = static_cast<Eigen::Index>(basis.size());
  const double scale = target.norm();
  const double goal = 1e-2 * options.fac_tol * scale;
  const double spread_limit = std::log(options.max_condition);

  std::array<ExpFactor, 5> f;
  const auto evaluate = [&](const Factors& x, std::array<ExpFactor, 5>& out) {
    Factors e;
    for (std::size_t i = 0; i < 5; ++i) {
      out[i] = exp_factor(x[i]);
      e[i] = out[i].value;
    }
    return Matrix(interleaved_product(e, links) - target);
  };
  Matrix r = evaluate(s, f);
  double rnorm = r.norm();
  double mu = -1.0;
  Matrix jac(n2, 5 * p);
  for (int iter = 0; iter < options.max_iterations && rnorm > goal; ++iter) {
    // Jacobian columns: L_i * Dexp(S_i)[B_k] * R_i.
    for (std::size_t i = 0; i < 5; ++i) {
      Matrix right = Matrix::Identity(n, n);
      for (std::size_t j = 0; j < i; ++j) right = links[j] * f[j].value * right;
      Matrix left = Matrix::Identity(n, n);
      for (std::size_t j = 4; j > i; --j) left = left * f[j].value * links[j - 1];
      const Matrix& v = f[i].vectors;
      for (Eigen::Index k = 0; k < p; ++k) {
        const Matrix inner = f[i].divided.cwiseProduct(v.transpose() * basis[static_cast<std::size_t>(k)] * v);
        const Matrix col = left * (v * inner * v.transpose()) * right;
        jac.col(static_cast<Eigen::Index>(i) * p + k) = Eigen::Map<const Vector>(col.data(), n2);
      }
    }
    const Matrix jjt = jac * jac.transpose();
    if (mu < 0.0) mu = 1e-3 * jjt.diagonal().maxCoeff();
    const Vector rv = Eigen::Map<const Vector>(r.data(), n2);
    bool accepted = false;
    while (!accepted) {
      Matrix sys = jjt;
      sys.diagonal().array() += mu;
      const Vector z = sys.ldlt().solve(rv);
      const Vector delta = -jac.transpose() * z;
      Factors trial = s;
      bool guarded = false;
      for (std::size_t i = 0; i < 5 && !guarded; ++i) {
        for (Eigen::Index k = 0; k < p; ++k) {
          trial[i] += delta(static_cast<Eigen::Index>(i) * p + k) * basis[static_cast<std::size_t>(k)];
        }
        trial[i] = symmetrize(trial[i]);
        guarded = eigen_spread(trial[i]) > std::max(spread_limit, eigen_spread(s[i]));
      }
      std::array<ExpFactor, 5> ft;
      Matrix rt;
      double rtnorm = std::numeric_limits<double>::infinity();
      if (!guarded) {
        rt = evaluate(trial, ft);
        if (rt.allFinite()) rtnorm = rt.norm();
      }
      if (rtnorm < rnorm) {
        s = std::move(trial);
        f = std::move(ft);
        r = std::move(rt);
        rnorm = rtnorm;
        mu = std::max(mu / 3.0, 1e-15 * jjt.diagonal().maxCoeff());
        accepted = true;
      } else {
        mu *= 4.0;
        if (mu > 1e12 * std::max(1.0, jjt.diagonal().maxCoeff())) {
          return {s, rnorm};
        }
      }
    }
  }
  return {s, rnorm};
}

double det_positive_or_throw(const Matrix& m, const char* what) {
  require_square(m, what);
  const double det = m.determinant();
  if (!(det > 0.0)) {
    throw Error(ErrorCode::kNotPositiveDeterminant,
                std::string(what) + " has determinant " + std::to_string(det));
  }
  return det;
}

}  // namespace

FiveFactor ballantine5(const Matrix& m, const FactorOptions& options) {
  const double det = det_positive_or_throw(m, "M");
  const Eigen::Index n = m.rows();
  FiveFactor out;
  out.target = m;
  const Matrix identity = Matrix::Identity(n, n);
  if (is_symmetric(m, 1e-14) && is_spd(m)) {
    out.q = {symmetrize(m), identity, identity, identity, identity};
    out.residual = (product(out.q) - m).norm();
    out.relative_residual = out.residual / m.norm();
    return out;
  }

  const double c = std::pow(det, 1.0 / static_cast<double>(n));
  const Matrix normalized = m / c;
  const auto basis = symmetric_basis(n);
  const Matrix p_log = symmetric_log(polar_right(normalized).second);
  std::mt19937_64 rng(options.seed);
  double best = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt <= options.max_restarts; ++attempt) {
    Factors seed;
    const double spread = attempt == 0 ? 0.2 : 0.5;
    seed[0] = attempt == 0 ? p_log : symmetrize(p_log + random_symmetric(n, spread, rng));
    for (std::size_t i = 1; i < 5; ++i) seed[i] = random_symmetric(n, spread, rng);
    const SearchResult found = levenberg_marquardt(normalized, seed, options, basis, identity_links(n));
    best = std::min(best, found.residual / normalized.norm());
    if (!(found.residual <= options.fac_tol * normalized.norm())) continue;
    for (std::size_t i = 0; i < 5; ++i) out.q[i] = symmetric_exp(found.s[i]);
    out.q[0] *= c;
    out.residual = (product(out.q) - m).norm();
    out.relative_residual = out.residual / m.norm();
    bool spd = out.relative_residual <= options.fac_tol;
    for (const Matrix& q : out.q) spd = spd && is_spd(q, 1e-12);
    if (!spd) continue;
    out.restarts = attempt;
    return out;
  }
  throw Error(ErrorCode::kFactorizationFailed,
              "five-factor search failed; best relative residual " + format_sci(best));
}

Matrix interleaved_product(const std::array<Matrix, 5>& q, const std::array<Matrix, 4>& m) {
  return q[4] * m[3] * q[3] * m[2] * q[2] * m[1] * q[1] * m[0] * q[0];
}

InterleavedFactor interleaved5(const Matrix& m, const std::array<Matrix, 4>& interleavers,
                               const FactorOptions& options) {
  det_positive_or_throw(m, "M");
  const Eigen::Index n = m.rows();
  for (std::size_t i = 0; i < 4; ++i) {
    const Matrix& mi = interleavers[i];
    if (mi.rows() != n || mi.cols() != n) {
      throw Error(ErrorCode::kInvalidArgument, "interleavers must match M in size");
    }
    require_finite(mi, "interleaver");
    Eigen::JacobiSVD<Matrix> svd(mi);
    const Vector sv = svd.singularValues();
    if (!(sv(n - 1) > 1e-14 * sv(0))) {
      throw Error(ErrorCode::kSingularInterleaver,
                  "interleaver " + std::to_string(i + 1) + " is numerically singular");
    }
    if (!(mi.determinant() > 0.0)) {
      throw Error(ErrorCode::kNotPositiveDeterminant,
                  "interleaver " + std::to_string(i + 1) + " has nonpositive determinant");
    }
  }
  InterleavedFactor out;
  bool found = false;

  // Direct search on the interleaved model keeps the conditioning of the
  // individual links instead of their product.
  double link_det = 1.0;
  for (const Matrix& mi : interleavers) link_det *= mi.determinant();
  const double c = std::pow(m.determinant() / link_det, 1.0 / static_cast<double>(n));
  const Matrix normalized = m / c;
  const auto basis = symmetric_basis(n);
  std::mt19937_64 rng(options.seed);
  for (int attempt = 0; attempt <= options.max_restarts && !found; ++attempt) {
    Factors seed;
    for (std::size_t i = 0; i < 5; ++i) {
      seed[i] = attempt == 0 ? Matrix(Matrix::Zero(n, n)) : random_symmetric(n, 0.5, rng);
    }
    const SearchResult r = levenberg_marquardt(normalized, seed, options, basis, interleavers);
    if (!(r.residual <= options.fac_tol * normalized.norm())) continue;
    for (std::size_t i = 0; i < 5; ++i) out.q[i] = symmetric_exp(r.s[i]);
    out.q[0] *= c;
    found = (interleaved_product(out.q, interleavers) - m).norm() <= options.fac_tol * m.norm();
  }

  if (!found) {
    // With L1 = M1 and L_{i+1} = M_{i+1} L_i^{-T}, the product collapses to
    // M = L4^{-T} Q5 Q4 Q3 Q2 Q1, so Q5..Q1 factor L4^T M and
    // Qb_{i+1} = L_i^{-T} Q_{i+1} L_i^{-1}.
    std::array<Matrix, 4> l;
    l[0] = interleavers[0];
    for (std::size_t i = 1; i < 4; ++i) {
      l[i] = interleavers[i] * l[i - 1].transpose().partialPivLu().inverse();
    }
    const Matrix n_target = l[3].transpose() * m;
    const FiveFactor base = ballantine5(n_target, options);
    out.q[0] = base.q[0];
    for (std::size_t i = 1; i < 5; ++i) {
      const Matrix l_inv = l[i - 1].partialPivLu().inverse();
      out.q[i] = symmetrize(l_inv.transpose() * base.q[i] * l_inv);
    }
  }
  out.residual = (interleaved_product(out.q, interleavers) - m).norm();
  out.relative_residual = out.residual / m.norm();
  if (!(out.relative_residual <= options.fac_tol)) {
    throw Error(ErrorCode::kFactorizationFailed,
                "interleaved reconstruction residual " + format_sci(out.relative_residual));
  }
  return out;
}

}  // namespace ltvsteer
