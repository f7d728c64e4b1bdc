#pragma once

#include <complex>

#include "evtobs/linalg.hpp"

namespace evtobs {

/// Solves A^T P + P A = -I for Hurwitz A by back-substitution on the complex
/// Schur form A = Q T Q^H (Bartels-Stewart). Throws NotHurwitz.
template <typename Scalar>
Mat<Scalar> solve_lyapunov(const Mat<Scalar>& a) {
  using C = std::complex<Scalar>;
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw Error(ErrorCode::DimensionMismatch, "A must be square");
  if (n == 0) return Mat<Scalar>(0, 0);

  Eigen::ComplexSchur<Mat<Scalar>> cs(a);
  if (cs.info() != Eigen::Success)
    throw Error(ErrorCode::SchurFailure, "complex Schur iteration did not converge");
  const Mat<C>& t = cs.matrixT();
  const Mat<C>& q = cs.matrixU();
  for (Eigen::Index k = 0; k < n; ++k)
    if (!(t(k, k).real() < Scalar(0)))
      throw Error(ErrorCode::NotHurwitz, "closed-loop matrix has an eigenvalue with Re >= 0");

  // With X = Q^H P Q the equation becomes T^H X + X T = -I.
  Mat<C> x = Mat<C>::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      C rhs = (i == j) ? C(-1) : C(0);
      for (Eigen::Index k = 0; k < i; ++k) rhs -= std::conj(t(k, i)) * x(k, j);
      for (Eigen::Index k = 0; k < j; ++k) rhs -= x(i, k) * t(k, j);
      x(i, j) = rhs / (std::conj(t(i, i)) + t(j, j));
    }
  }
  Mat<Scalar> p = (q * x * q.adjoint()).real();
  return Scalar(0.5) * (p + p.transpose());
}

/// ||A^T P + P A + I||_2, the residual the solver is held to.
template <typename Scalar>
Scalar lyapunov_residual(const Mat<Scalar>& a, const Mat<Scalar>& p) {
  const Mat<Scalar> r =
      a.transpose() * p + p * a + Mat<Scalar>::Identity(a.rows(), a.cols());
  return spectral_norm(r);
}

}  // namespace evtobs
