#pragma once

#include <vector>

#include "evtobs/linalg.hpp"

namespace evtobs {

/// LTI plant x' = A x observed by N agents through y_i = H_i x.
struct Plant {
  MatrixXd a;
  std::vector<MatrixXd> h;  // one m_i x n block per agent
  VectorXd x0;

  int n() const { return static_cast<int>(a.rows()); }
  int n_agents() const { return static_cast<int>(h.size()); }
  MatrixXd stacked_h() const;
};

/// Orthonormal change of basis T_i = [D_i U_i] splitting agent i's view of the
/// plant into a detectable part and its undetectable subspace U_i.
struct AgentDecomposition {
  MatrixXd d;  // n x (n - p)
  MatrixXd u;  // n x p
  MatrixXd t;  // n x n
  int p = 0;
  MatrixXd a_d;  // (n-p) x (n-p)
  MatrixXd a_r;  // p x (n-p)
  MatrixXd a_u;  // p x p
  MatrixXd h_d;  // m x (n-p)
  int borderline_modes = 0;  // eigenvalues with |Re| below the classification tol
};

struct DecompTolerances {
  double rank_rel = 1e-8;  // sigma <= rank_rel * sigma_max counts as zero
  double rhp = 1e-9;       // Re(lambda) >= -rhp is closed right half-plane
};

/// Orthonormal basis of the invariant subspace of A for eigenvalues with
/// Re(lambda) >= -tol. `borderline` (optional) receives the number of
/// eigenvalues with |Re(lambda)| < tol.
MatrixXd antistable_subspace(const MatrixXd& a, double tol = 1e-9, int* borderline = nullptr);

/// Orthonormal basis of the kernel of col{H A^k}, k = 0..n-1.
MatrixXd unobservable_subspace(const MatrixXd& a, const MatrixXd& h, double rank_rel = 1e-8);

/// Detectability decomposition for the pair (A, h).
AgentDecomposition detectability_decompose(const MatrixXd& a, const MatrixXd& h,
                                           const DecompTolerances& tol = {});

/// Decomposition of agent `agent` of the plant.
AgentDecomposition detectability_decompose(const Plant& plant, int agent,
                                           const DecompTolerances& tol = {});

/// Decomposes every agent after checking that the stacked pair (A, H) is
/// detectable; throws JointUndetectable otherwise.
std::vector<AgentDecomposition> decompose_all(const Plant& plant, const DecompTolerances& tol = {});

}  // namespace evtobs
