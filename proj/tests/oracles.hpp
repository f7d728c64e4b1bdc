#pragma once

// Reference computations used by the tests. Each takes a different route from
// the library: Kronecker linear solves, long-double series and quadrature.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

/// Solves A^T P + P A = -I through the n^2 x n^2 Kronecker system.
inline Eigen::MatrixXd lyapunov(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXd i = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n * n, n * n);
  // vec(A^T P) = (I ⊗ A^T) vec P, vec(P A) = (A^T ⊗ I) vec P
  for (Eigen::Index bi = 0; bi < n; ++bi)
    for (Eigen::Index bj = 0; bj < n; ++bj) {
      k.block(bi * n, bj * n, n, n) += a(bj, bi) * i;
      if (bi == bj) k.block(bi * n, bj * n, n, n) += a.transpose();
    }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(i.data(), n * n);
  const Eigen::VectorXd p = k.fullPivLu().solve(rhs);
  return Eigen::Map<const Eigen::MatrixXd>(p.data(), n, n);
}

/// Faddeev-LeVerrier in long double: monic coefficients of det(sI - M).
inline std::vector<long double> charpoly(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  const LMat a = m.cast<long double>();
  std::vector<long double> c(n + 1);
  c[0] = 1;
  LMat mk = LMat::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    mk = a * mk + c[k - 1] * LMat::Identity(n, n);
    c[k] = -(a * mk).trace() / k;
  }
  return c;
}

/// Truncated Taylor series of e^{A t} in long double.
inline Eigen::MatrixXd taylor_exp(const Eigen::MatrixXd& a, double t, int terms = 40) {
  const LMat m = a.cast<long double>() * static_cast<long double>(t);
  LMat sum = LMat::Identity(a.rows(), a.cols()), term = sum;
  for (int k = 1; k < terms; ++k) {
    term = term * m / static_cast<long double>(k);
    sum += term;
  }
  return sum.cast<double>();
}

namespace detail {
template <typename G>
long double simpson(const G& g, long double lo, long double hi, long double whole, long double fa,
                    long double fm, long double fb, int depth) {
  const long double mid = (lo + hi) / 2, lm = (lo + mid) / 2, rm = (mid + hi) / 2;
  const long double flm = g(lm), frm = g(rm);
  const long double left = (mid - lo) / 6 * (fa + 4 * flm + fm);
  const long double right = (hi - mid) / 6 * (fm + 4 * frm + fb);
  if (depth > 50 || std::fabs(left + right - whole) <= 1e-15L * std::fabs(left + right))
    return left + right + (left + right - whole) / 15;
  return simpson(g, lo, mid, left, fa, flm, fm, depth + 1) +
         simpson(g, mid, hi, right, fm, frm, fb, depth + 1);
}
}  // namespace detail

/// \int_0^u ds / (q s^2 + b s + k) by adaptive Simpson in long double.
inline double escape_time(double k, double b, double q, double u) {
  auto g = [&](long double s) { return 1.0L / (q * s * s + b * s + k); };
  const long double fa = g(0), fm = g(u / 2.0L), fb = g(u);
  return static_cast<double>(
      detail::simpson(g, 0.0L, static_cast<long double>(u), u / 6.0L * (fa + 4 * fm + fb), fa, fm, fb, 0));
}

}  // namespace oracle
