#pragma once

// Independent reference computations and random generators for tests. None
// of these call into the library's integrator or decompositions.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Scaling-and-squaring Pade exponential.
inline Matrix expm(const Matrix& a) { return a.exp(); }

// Van Loan block exponential: G(T,0) = int_0^T e^{A s} B B^T e^{A^T s} ds for
// constant (A, B).
inline Matrix constant_reach_gramian(const Matrix& a, const Matrix& b, double t) {
  const Eigen::Index n = a.rows();
  Matrix big = Matrix::Zero(2 * n, 2 * n);
  big.topLeftCorner(n, n) = -a;
  big.topRightCorner(n, n) = b * b.transpose();
  big.bottomRightCorner(n, n) = a.transpose();
  const Matrix e = (big * t).exp();
  const Matrix phi = e.bottomRightCorner(n, n).transpose();
  const Matrix g = phi * e.topRightCorner(n, n);
  return 0.5 * (g + g.transpose());
}

// H(T,0) = e^{-AT} G(T,0) e^{-A^T T} for constant (A, B).
inline Matrix constant_ctrl_gramian(const Matrix& a, const Matrix& b, double t) {
  const Matrix back = (-a * t).exp();
  const Matrix h = back * constant_reach_gramian(a, b, t) * back.transpose();
  return 0.5 * (h + h.transpose());
}

using MatFn = std::function<Matrix(double)>;

// Classical fixed-step RK4 for X' = A(t) X from t0 to t1.
inline Matrix rk4_stm(const MatFn& a, double t0, double t1, int steps) {
  const Eigen::Index n = a(t0).rows();
  Matrix x = Matrix::Identity(n, n);
  const double h = (t1 - t0) / steps;
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * h;
    const Matrix k1 = a(t) * x;
    const Matrix k2 = a(t + h / 2) * (x + h / 2 * k1);
    const Matrix k3 = a(t + h / 2) * (x + h / 2 * k2);
    const Matrix k4 = a(t + h) * (x + h * k3);
    x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return x;
}

// Composite Simpson sums of the Gramian integrands, with transition
// matrices from fixed-step RK4 restarted on each subinterval. Returns {G, H}
// of [t0, t1]. `nodes` must be even; A and B must be smooth between
// consecutive nodes.
struct GramianPair {
  Matrix g;
  Matrix h;
};
inline GramianPair simpson_gramians(const MatFn& a, const MatFn& b, double t0, double t1,
                                    int nodes, int rk_steps_per_node = 8) {
  const Eigen::Index n = a(t0).rows();
  const double dt = (t1 - t0) / nodes;
  // Phi_A(tau_k, t0) by chaining RK4 steps.
  std::vector<Matrix> phi(nodes + 1);
  phi[0] = Matrix::Identity(n, n);
  for (int k = 0; k < nodes; ++k) {
    phi[k + 1] = rk4_stm(a, t0 + k * dt, t0 + (k + 1) * dt, rk_steps_per_node) * phi[k];
  }
  Matrix g = Matrix::Zero(n, n);
  Matrix h = Matrix::Zero(n, n);
  for (int k = 0; k <= nodes; ++k) {
    const double w = (k == 0 || k == nodes) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const double tau = t0 + k * dt;
    const Matrix bt = b(tau);
    // Phi_A(T, tau) = Phi(T) Phi(tau)^{-1}; Phi_A(t0, tau) = Phi(tau)^{-1}.
    const Matrix back = phi[k].inverse();
    const Matrix fwd = phi[nodes] * back;
    g += w * fwd * bt * bt.transpose() * fwd.transpose();
    h += w * back * bt * bt.transpose() * back.transpose();
  }
  g *= dt / 3;
  h *= dt / 3;
  return {0.5 * (g + g.transpose()), 0.5 * (h + h.transpose())};
}

// Fixed-step RK4 of the closed loop Pi' = -A^T Pi - Pi A + Pi B B^T Pi,
// Phi' = (A - B B^T Pi) Phi. Returns Phi(t1, t0); sets escaped when ||Pi||
// exceeds the threshold.
inline Matrix rk4_closed_loop(const MatFn& a, const MatFn& b, const Matrix& pi0, double t0,
                              double t1, int steps, bool* escaped = nullptr,
                              double threshold = 1e10) {
  const Eigen::Index n = pi0.rows();
  Matrix pi = pi0;
  Matrix phi = Matrix::Identity(n, n);
  const double h = (t1 - t0) / steps;
  const auto f = [&](double t, const Matrix& p, const Matrix& x, Matrix& dp, Matrix& dx) {
    const Matrix at = a(t);
    const Matrix bt = b(t);
    const Matrix bbt = bt * bt.transpose();
    dp = -at.transpose() * p - p * at + p * bbt * p;
    dx = (at - bbt * p) * x;
  };
  if (escaped) *escaped = false;
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * h;
    Matrix p1, x1, p2, x2, p3, x3, p4, x4;
    f(t, pi, phi, p1, x1);
    f(t + h / 2, pi + h / 2 * p1, phi + h / 2 * x1, p2, x2);
    f(t + h / 2, pi + h / 2 * p2, phi + h / 2 * x2, p3, x3);
    f(t + h, pi + h * p3, phi + h * x3, p4, x4);
    pi += h / 6 * (p1 + 2 * p2 + 2 * p3 + p4);
    phi += h / 6 * (x1 + 2 * x2 + 2 * x3 + x4);
    if (!(pi.norm() < threshold)) {
      if (escaped) *escaped = true;
      return phi;
    }
  }
  return phi;
}

// Symmetric square root from Eigen's own solver.
inline Matrix sqrtm_sym(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  return es.operatorSqrt();
}
inline Matrix inv_sqrtm_sym(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  return es.operatorInverseSqrt();
}

// Alternative closed form of the SPD solution of W = Y Q Y:
// Y = Q^{-1/2} (Q^{1/2} W Q^{1/2})^{1/2} Q^{-1/2}.
inline Matrix geometric_solve_alt(const Matrix& w, const Matrix& q) {
  const Matrix qh = sqrtm_sym(q);
  const Matrix qih = inv_sqrtm_sym(q);
  return qih * sqrtm_sym(qh * w * qh) * qih;
}

// Greedy multiset match of two complex spectra; returns the largest distance
// between matched pairs.
inline double spectrum_distance(Eigen::VectorXcd x, Eigen::VectorXcd y) {
  std::vector<std::complex<double>> a(x.data(), x.data() + x.size());
  std::vector<std::complex<double>> b(y.data(), y.data() + y.size());
  double worst = 0.0;
  while (!a.empty()) {
    std::size_t bi = 0, bj = 0;
    double best = INFINITY;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        const double d = std::abs(a[i] - b[j]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    worst = std::max(worst, best);
    a.erase(a.begin() + static_cast<long>(bi));
    b.erase(b.begin() + static_cast<long>(bj));
  }
  return worst;
}

// Random generators.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  Matrix normal(Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = d(rng_);
    return m;
  }

  Matrix symmetric(Eigen::Index n, double scale = 1.0) {
    const Matrix m = normal(n, n, scale);
    return 0.5 * (m + m.transpose());
  }

  Matrix orthogonal(Eigen::Index n) {
    Eigen::HouseholderQR<Matrix> qr(normal(n, n));
    Matrix q = qr.householderQ();
    if (q.determinant() < 0) q.col(0) = -q.col(0);
    return q;
  }

  // SPD with eigenvalues in [lo, hi].
  Matrix spd(Eigen::Index n, double lo = 0.2, double hi = 3.0) {
    const Matrix q = orthogonal(n);
    Vector d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = uniform(lo, hi);
    return q * d.asDiagonal() * q.transpose();
  }

  // PSD of the given rank, nonzero eigenvalues in [lo, hi].
  Matrix psd(Eigen::Index n, Eigen::Index rank, double lo = 0.2, double hi = 3.0) {
    const Matrix q = orthogonal(n);
    Vector d = Vector::Zero(n);
    for (Eigen::Index i = 0; i < rank; ++i) d(i) = uniform(lo, hi);
    return q * d.asDiagonal() * q.transpose();
  }

  // det > 0, singular values in [lo, hi].
  Matrix glplus(Eigen::Index n, double lo = 0.3, double hi = 2.5) {
    Vector s(n);
    for (Eigen::Index i = 0; i < n; ++i) s(i) = uniform(lo, hi);
    return orthogonal(n) * s.asDiagonal() * orthogonal(n);
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline Matrix rotation2(double angle, double scale = 1.0) {
  Matrix r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return scale * r;
}

inline bool is_spd(const Matrix& m, double sym_tol = 1e-10, double rel_floor = 1e-12) {
  if ((m - m.transpose()).norm() > sym_tol * std::max(1.0, m.norm())) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  return es.eigenvalues()(0) > rel_floor * es.eigenvalues().maxCoeff() && es.eigenvalues().maxCoeff() > 0;
}

// Moore-Penrose identities residual.
inline double penrose_residual(const Matrix& a, const Matrix& x) {
  return std::max({(a * x * a - a).norm(), (x * a * x - x).norm(),
                   (a * x - (a * x).transpose()).norm(), (x * a - (x * a).transpose()).norm()});
}

}  // namespace oracle
