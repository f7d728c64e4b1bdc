#pragma once

// Dense linear-algebra helpers shared by the decomposition, gain and graph
// code. Everything here is templated on the scalar type and works on
// dynamic-size Eigen matrices; dimensions in this library are desk scale.

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <vector>

#include "evtobs/error.hpp"

namespace evtobs {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Mat<double>;
using VectorXd = Vec<double>;

/// Induced 2-norm. Empty matrices have norm 0.
template <typename Derived>
typename Derived::RealScalar spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  using Real = typename Derived::RealScalar;
  if (m.size() == 0) return Real(0);
  Eigen::JacobiSVD<Mat<typename Derived::Scalar>> svd(m);
  return svd.singularValues()(0);
}

/// Orthonormal basis of ker(m). A singular value counts as zero when it is at
/// most rel_tol * sigma_max; an all-zero (or row-less) matrix has the whole
/// space as kernel.
template <typename Derived>
Mat<typename Derived::Scalar> null_space(const Eigen::MatrixBase<Derived>& m,
                                         typename Derived::RealScalar rel_tol = 1e-8) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index cols = m.cols();
  if (cols == 0) return Mat<Scalar>(0, 0);
  if (m.rows() == 0) return Mat<Scalar>::Identity(cols, cols);
  Eigen::JacobiSVD<Mat<Scalar>> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  if (sv.size() > 0 && sv(0) > 0) {
    const auto cut = rel_tol * sv(0);
    while (rank < sv.size() && sv(rank) > cut) ++rank;
  }
  return svd.matrixV().rightCols(cols - rank);
}

/// Orthonormal basis of im(m) with the same rank rule as null_space.
template <typename Derived>
Mat<typename Derived::Scalar> range_basis(const Eigen::MatrixBase<Derived>& m,
                                          typename Derived::RealScalar rel_tol = 1e-8) {
  using Scalar = typename Derived::Scalar;
  if (m.cols() == 0 || m.rows() == 0) return Mat<Scalar>(m.rows(), 0);
  Eigen::JacobiSVD<Mat<Scalar>> svd(m, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  if (sv(0) > 0) {
    const auto cut = rel_tol * sv(0);
    while (rank < sv.size() && sv(rank) > cut) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

/// Orthonormal basis of the orthogonal complement of span(basis), where
/// basis is n x q with orthonormal columns.
template <typename Scalar>
Mat<Scalar> orthogonal_complement(const Mat<Scalar>& basis, Eigen::Index n) {
  if (basis.cols() == 0) return Mat<Scalar>::Identity(n, n);
  return null_space(basis.transpose().eval());
}

/// span(b1) ∩ span(b2) as the kernel of the stacked complement projectors.
template <typename Scalar>
Mat<Scalar> subspace_intersection(const Mat<Scalar>& b1, const Mat<Scalar>& b2,
                                  Scalar rel_tol = Scalar(1e-8)) {
  const Eigen::Index n = b1.rows();
  if (b1.cols() == 0 || b2.cols() == 0) return Mat<Scalar>(n, 0);
  const Mat<Scalar> id = Mat<Scalar>::Identity(n, n);
  Mat<Scalar> stacked(2 * n, n);
  stacked.topRows(n) = id - b1 * b1.transpose();
  stacked.bottomRows(n) = id - b2 * b2.transpose();
  return null_space(stacked, rel_tol);
}

template <typename Scalar>
Mat<Scalar> kron(const Mat<Scalar>& a, const Mat<Scalar>& b) {
  Mat<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

template <typename Scalar>
Mat<Scalar> block_diag(const std::vector<Mat<Scalar>>& blocks) {
  Eigen::Index rows = 0, cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Mat<Scalar> out = Mat<Scalar>::Zero(rows, cols);
  Eigen::Index r = 0, c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

/// Result of an ordered complex Schur factorization A = Q T Q^H in which the
/// `selected` leading diagonal entries of T satisfy the selection predicate.
template <typename Scalar>
struct OrderedSchur {
  Mat<std::complex<Scalar>> q;
  Mat<std::complex<Scalar>> t;
  Eigen::Index selected = 0;
};

namespace detail {

// Swap the adjacent diagonal entries k, k+1 of the upper-triangular t with a
// unitary rotation, updating q so that A = Q T Q^H is preserved.
template <typename Scalar>
void swap_schur_entries(Mat<std::complex<Scalar>>& t, Mat<std::complex<Scalar>>& q,
                        Eigen::Index k) {
  using C = std::complex<Scalar>;
  const C a = t(k, k);
  const C b = t(k, k + 1);
  const C d = t(k + 1, k + 1);
  // Eigenvector of the 2x2 block for eigenvalue d.
  C v1 = b;
  C v2 = d - a;
  const Scalar nrm = std::sqrt(std::norm(v1) + std::norm(v2));
  if (nrm == Scalar(0)) return;  // a == d and b == 0: nothing to do
  v1 /= nrm;
  v2 /= nrm;
  Eigen::Matrix<C, 2, 2> g;
  g << v1, -std::conj(v2), v2, std::conj(v1);
  // T <- G^H T G restricted to rows/cols k, k+1.
  Mat<C> rows = t.middleRows(k, 2);
  t.middleRows(k, 2) = g.adjoint() * rows;
  Mat<C> cols = t.middleCols(k, 2);
  t.middleCols(k, 2) = cols * g;
  Mat<C> qcols = q.middleCols(k, 2);
  q.middleCols(k, 2) = qcols * g;
  t(k + 1, k) = C(0);
}

}  // namespace detail

/// Complex Schur form reordered so that every eigenvalue for which
/// `select(lambda)` holds comes first.
template <typename Scalar, typename Pred>
OrderedSchur<Scalar> ordered_schur(const Mat<Scalar>& a, Pred select) {
  OrderedSchur<Scalar> out;
  if (a.rows() == 0) return out;
  Eigen::ComplexSchur<Mat<Scalar>> cs(a);
  if (cs.info() != Eigen::Success)
    throw Error(ErrorCode::SchurFailure, "complex Schur iteration did not converge");
  out.q = cs.matrixU();
  out.t = cs.matrixT();
  const Eigen::Index n = a.rows();
  Eigen::Index placed = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!select(out.t(j, j))) continue;
    for (Eigen::Index k = j - 1; k >= placed; --k) detail::swap_schur_entries(out.t, out.q, k);
    ++placed;
  }
  out.selected = placed;
  return out;
}

/// Real orthonormal basis of a conjugation-closed complex subspace given by
/// the orthonormal columns of `basis`.
template <typename Scalar>
Mat<Scalar> realify_basis(const Mat<std::complex<Scalar>>& basis) {
  const Eigen::Index n = basis.rows();
  const Eigen::Index k = basis.cols();
  if (k == 0) return Mat<Scalar>(n, 0);
  Mat<Scalar> parts(n, 2 * k);
  parts.leftCols(k) = basis.real();
  parts.rightCols(k) = basis.imag();
  Eigen::JacobiSVD<Mat<Scalar>> svd(parts, Eigen::ComputeFullU);
  return svd.matrixU().leftCols(k);
}

}  // namespace evtobs
