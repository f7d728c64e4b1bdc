#pragma once

// Output-injection gain design for observers: find L with
// eig(A - L H) equal to a requested conjugate-closed pole set.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "evtobs/linalg.hpp"

namespace evtobs {

template <typename Scalar>
using PoleSet = std::vector<std::complex<Scalar>>;

/// Real coefficients c_0..c_n (monic, c_0 = 1) of prod (s - pole).
template <typename Scalar>
std::vector<Scalar> poly_from_roots(const PoleSet<Scalar>& poles) {
  std::vector<std::complex<Scalar>> c{1};
  for (const auto& r : poles) {
    std::vector<std::complex<Scalar>> next(c.size() + 1, 0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k] += c[k];
      next[k + 1] -= r * c[k];
    }
    c = std::move(next);
  }
  std::vector<Scalar> out(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) out[k] = c[k].real();
  return out;
}

/// Checks count, Hurwitz-ness and conjugate closure; throws BadPoleSet.
template <typename Scalar>
void validate_pole_set(const PoleSet<Scalar>& poles, Eigen::Index expected, Scalar tol) {
  if (static_cast<Eigen::Index>(poles.size()) != expected)
    throw Error(ErrorCode::BadPoleSet, "pole count " + std::to_string(poles.size()) +
                                           " != " + std::to_string(expected));
  std::vector<bool> used(poles.size(), false);
  for (std::size_t k = 0; k < poles.size(); ++k) {
    if (!(poles[k].real() < 0)) throw Error(ErrorCode::BadPoleSet, "desired pole not in open LHP");
    if (used[k]) continue;
    if (std::abs(poles[k].imag()) <= tol) {
      used[k] = true;
      continue;
    }
    bool matched = false;
    for (std::size_t l = k + 1; l < poles.size() && !matched; ++l) {
      if (!used[l] && std::abs(poles[l] - std::conj(poles[k])) <= tol) {
        used[l] = used[k] = true;
        matched = true;
      }
    }
    if (!matched) throw Error(ErrorCode::BadPoleSet, "pole set is not closed under conjugation");
  }
}

/// Observability matrix col{h a^k}, k = 0..n-1.
template <typename Scalar>
Mat<Scalar> observability_matrix(const Mat<Scalar>& a, const Mat<Scalar>& h) {
  const Eigen::Index n = a.rows(), m = h.rows();
  Mat<Scalar> obs(m * n, n);
  Mat<Scalar> block = h;
  for (Eigen::Index k = 0; k < n; ++k) {
    obs.middleRows(k * m, m) = block;
    block = block * a;
  }
  return obs;
}

namespace detail {

template <typename Scalar>
Scalar inverse_condition(const Mat<Scalar>& m) {
  if (m.size() == 0) return Scalar(1);
  Eigen::JacobiSVD<Mat<Scalar>> svd(m);
  const auto& sv = svd.singularValues();
  if (sv(0) == Scalar(0)) return Scalar(0);
  return sv(sv.size() - 1) / sv(0);
}

// Ackermann's formula on the dual pair for a single output row h:
// l = phi(A) O^{-1} e_n.
template <typename Scalar>
Vec<Scalar> ackermann_dual(const Mat<Scalar>& a, const Mat<Scalar>& h,
                           const std::vector<Scalar>& coeffs) {
  const Eigen::Index n = a.rows();
  const Mat<Scalar> obs = observability_matrix(a, h);
  Mat<Scalar> phi = Mat<Scalar>::Zero(n, n);
  // Horner: phi = ((A + c1) A + c2) A + ... + cn I.
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    phi = (k == 0) ? Mat<Scalar>(coeffs[0] * Mat<Scalar>::Identity(n, n))
                   : Mat<Scalar>(phi * a + coeffs[k] * Mat<Scalar>::Identity(n, n));
  }
  Vec<Scalar> en = Vec<Scalar>::Zero(n);
  en(n - 1) = 1;
  return phi * obs.fullPivLu().solve(en);
}

}  // namespace detail

struct PlacementOptions {
  double pole_tol = 1e-9;      // conjugate matching tolerance
  double observable_tol = 1e-10;  // minimum sigma_min/sigma_max of the observability matrix
};

/// Returns L (n x m) such that eig(a - L h) equals `poles`. Single-output pairs
/// use Ackermann's formula on the dual system. Multi-output pairs are reduced
/// to a single output h_w = w^T h by trying unit vectors, then the all-ones
/// vector, then a fixed-seed sequence of random combinations; if A itself is
/// not cyclic a fixed-seed preliminary injection is applied first. Throws
/// Unplaceable when (a, h) is not observable and BadPoleSet on bad poles.
template <typename Scalar>
Mat<Scalar> place_observer_poles(const Mat<Scalar>& a, const Mat<Scalar>& h,
                                 const PoleSet<Scalar>& poles, const PlacementOptions& opt = {}) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = h.rows();
  if (a.cols() != n || h.cols() != n)
    throw Error(ErrorCode::DimensionMismatch, "incompatible (A, H) dimensions");
  validate_pole_set(poles, n, Scalar(opt.pole_tol));
  if (n == 0) return Mat<Scalar>(0, m);
  if (m == 0) throw Error(ErrorCode::Unplaceable, "no outputs to inject");

  const Mat<Scalar> obs = observability_matrix(a, h);
  if (range_basis(obs).cols() < n)
    throw Error(ErrorCode::Unplaceable, "pair has an unobservable mode");

  const auto coeffs = poly_from_roots(poles);
  auto try_weights = [&](const Mat<Scalar>& a_base, Mat<Scalar>& gain) {
    std::vector<Vec<Scalar>> candidates;
    for (Eigen::Index k = 0; k < m; ++k) candidates.push_back(Vec<Scalar>::Unit(m, k));
    if (m > 1) candidates.push_back(Vec<Scalar>::Ones(m));
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int r = 0; r < 16 && m > 1; ++r) {
      Vec<Scalar> w(m);
      for (Eigen::Index k = 0; k < m; ++k) w(k) = Scalar(unif(rng));
      candidates.push_back(w);
    }
    for (const auto& w : candidates) {
      const Mat<Scalar> hw = w.transpose() * h;
      if (detail::inverse_condition(observability_matrix(a_base, hw)) < Scalar(opt.observable_tol))
        continue;
      gain = detail::ackermann_dual(a_base, hw, coeffs) * w.transpose();
      return true;
    }
    return false;
  };

  Mat<Scalar> gain;
  if (try_weights(a, gain)) return gain;

  // A is not cyclic: a generic output injection makes it so.
  std::mt19937_64 rng(0xc7c11c);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const Scalar scale = std::max<Scalar>(Scalar(1), spectral_norm(a)) / std::max<Scalar>(Scalar(1), spectral_norm(h));
  for (int attempt = 0; attempt < 8; ++attempt) {
    Mat<Scalar> l0(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < m; ++j) l0(i, j) = scale * Scalar(unif(rng));
    const Mat<Scalar> a0 = a - l0 * h;
    if (try_weights(a0, gain)) return l0 + gain;
  }
  throw Error(ErrorCode::Unplaceable, "no single-output reduction found");
}

/// Output injection for a detectable (not necessarily observable) pair: poles
/// of the observable part are placed at the first r entries of `poles`
/// (r = observable dimension) and the stable unobservable modes are kept.
/// Throws NotHurwitz if an unobservable mode is not stable.
template <typename Scalar>
Mat<Scalar> place_detectable(const Mat<Scalar>& a, const Mat<Scalar>& h,
                             const PoleSet<Scalar>& poles, const PlacementOptions& opt = {}) {
  const Eigen::Index n = a.rows();
  const Mat<Scalar> obs_basis = n == 0 ? Mat<Scalar>(0, 0)
                                       : range_basis(observability_matrix(a, h).transpose().eval());
  const Eigen::Index r = obs_basis.cols();
  if (r == n) return place_observer_poles(a, h, poles, opt);

  if (static_cast<Eigen::Index>(poles.size()) < r)
    throw Error(ErrorCode::BadPoleSet, "fewer desired poles than observable modes");
  PoleSet<Scalar> head(poles.begin(), poles.begin() + r);
  const Mat<Scalar> unobs = orthogonal_complement<Scalar>(obs_basis, n);
  const Mat<Scalar> a_nn = unobs.transpose() * a * unobs;
  Eigen::ComplexEigenSolver<Mat<Scalar>> es(a_nn, false);
  for (Eigen::Index k = 0; k < a_nn.rows(); ++k)
    if (!(es.eigenvalues()(k).real() < 0))
      throw Error(ErrorCode::NotHurwitz, "unobservable mode is not stable (pair not detectable)");
  if (r == 0) return Mat<Scalar>::Zero(n, h.rows());
  const Mat<Scalar> a_oo = obs_basis.transpose() * a * obs_basis;
  const Mat<Scalar> h_o = h * obs_basis;
  return obs_basis * place_observer_poles(a_oo, h_o, head, opt);
}

}  // namespace evtobs
