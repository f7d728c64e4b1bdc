#include "evtobs/decomp.hpp"

#include <cmath>
#include <sstream>

namespace evtobs {

MatrixXd Plant::stacked_h() const {
  Eigen::Index rows = 0;
  for (const auto& hi : h) rows += hi.rows();
  MatrixXd out(rows, a.cols());
  Eigen::Index r = 0;
  for (const auto& hi : h) {
    out.middleRows(r, hi.rows()) = hi;
    r += hi.rows();
  }
  return out;
}

MatrixXd antistable_subspace(const MatrixXd& a, double tol, int* borderline) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "A must be square");
  const auto schur =
      ordered_schur(a, [tol](const std::complex<double>& lam) { return lam.real() >= -tol; });
  if (borderline) {
    int count = 0;
    for (Eigen::Index k = 0; k < schur.t.rows(); ++k)
      if (std::abs(schur.t(k, k).real()) < tol) ++count;
    *borderline = count;
  }
  if (schur.selected == a.rows()) return MatrixXd::Identity(a.rows(), a.rows());
  return realify_basis<double>(schur.q.leftCols(schur.selected));
}

MatrixXd unobservable_subspace(const MatrixXd& a, const MatrixXd& h, double rank_rel) {
  const Eigen::Index n = a.rows();
  if (h.cols() != n) throw Error(ErrorCode::DimensionMismatch, "H must have n columns");
  const Eigen::Index m = h.rows();
  if (m == 0) return MatrixXd::Identity(n, n);
  MatrixXd obs(m * n, n);
  MatrixXd block = h;
  for (Eigen::Index k = 0; k < n; ++k) {
    obs.middleRows(k * m, m) = block;
    block = block * a;
  }
  return null_space(obs, rank_rel);
}

AgentDecomposition detectability_decompose(const MatrixXd& a, const MatrixXd& h,
                                           const DecompTolerances& tol) {
  const Eigen::Index n = a.rows();
  AgentDecomposition dec;
  const MatrixXd unobs = unobservable_subspace(a, h, tol.rank_rel);
  const MatrixXd anti = antistable_subspace(a, tol.rhp, &dec.borderline_modes);
  dec.u = subspace_intersection<double>(unobs, anti, tol.rank_rel);
  dec.p = static_cast<int>(dec.u.cols());
  dec.d = orthogonal_complement<double>(dec.u, n);
  dec.t.resize(n, n);
  dec.t << dec.d, dec.u;

  const Eigen::Index q = n - dec.p;
  const MatrixXd at = dec.t.transpose() * a * dec.t;
  const MatrixXd ht = h * dec.t;
  dec.a_d = at.topLeftCorner(q, q);
  dec.a_r = at.bottomLeftCorner(dec.p, q);
  dec.a_u = at.bottomRightCorner(dec.p, dec.p);
  dec.h_d = ht.leftCols(q);
  return dec;
}

AgentDecomposition detectability_decompose(const Plant& plant, int agent,
                                           const DecompTolerances& tol) {
  return detectability_decompose(plant.a, plant.h.at(agent), tol);
}

std::vector<AgentDecomposition> decompose_all(const Plant& plant, const DecompTolerances& tol) {
  const auto joint = detectability_decompose(plant.a, plant.stacked_h(), tol);
  if (joint.p != 0) {
    std::ostringstream msg;
    msg << "stacked pair (A, H) has a " << joint.p << "-dimensional undetectable subspace";
    throw Error(ErrorCode::JointUndetectable, msg.str());
  }
  std::vector<AgentDecomposition> out;
  out.reserve(plant.h.size());
  for (int i = 0; i < plant.n_agents(); ++i) out.push_back(detectability_decompose(plant, i, tol));
  return out;
}

}  // namespace evtobs
