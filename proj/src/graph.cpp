#include "evtobs/graph.hpp"

#include <cmath>
#include <sstream>
#include <tuple>

namespace evtobs {

std::vector<std::pair<int, int>> Topology::directed_edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n_agents; ++i)
    for (int j : neighbors[i]) out.emplace_back(i, j);
  return out;
}

Topology build_topology(const MatrixXd& adjacency, double tol) {
  if (adjacency.rows() != adjacency.cols() || adjacency.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, "adjacency must be a non-empty square matrix");
  const int n = static_cast<int>(adjacency.rows());
  for (int i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0.0) {
      std::ostringstream msg;
      msg << "a_" << i + 1 << i + 1 << " = " << adjacency(i, i);
      throw Error(ErrorCode::NonzeroDiagonal, msg.str());
    }
    for (int j = 0; j < n; ++j) {
      if (!(adjacency(i, j) >= 0.0))
        throw Error(ErrorCode::ValidationError, "adjacency weights must be non-negative");
      if (adjacency(i, j) != adjacency(j, i)) {
        std::ostringstream msg;
        msg << "a_" << i + 1 << j + 1 << " != a_" << j + 1 << i + 1;
        throw Error(ErrorCode::NotSymmetric, msg.str());
      }
    }
  }

  Topology topo;
  topo.n_agents = n;
  topo.adjacency = adjacency;
  topo.laplacian = -adjacency;
  topo.neighbors.resize(n);
  topo.degree_counts.resize(n);
  for (int i = 0; i < n; ++i) {
    topo.laplacian(i, i) = adjacency.row(i).sum();
    for (int j = 0; j < n; ++j)
      if (adjacency(i, j) > 0.0) topo.neighbors[i].push_back(j);
    topo.degree_counts[i] = static_cast<int>(topo.neighbors[i].size());
  }

  if (n > 1) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(topo.laplacian, Eigen::EigenvaluesOnly);
    const double fiedler = es.eigenvalues()(1);
    if (!(fiedler > tol)) {
      std::ostringstream msg;
      msg << "second-smallest Laplacian eigenvalue " << fiedler << " <= " << tol;
      throw Error(ErrorCode::Disconnected, msg.str());
    }
  }
  return topo;
}

MatrixXd adjacency_from_edges(int n_agents,
                              const std::vector<std::tuple<int, int, double>>& edges) {
  MatrixXd adj = MatrixXd::Zero(n_agents, n_agents);
  for (const auto& [i, j, w] : edges) {
    if (i < 0 || j < 0 || i >= n_agents || j >= n_agents)
      throw Error(ErrorCode::ValidationError, "edge endpoint out of range");
    adj(i, j) = w;
    adj(j, i) = w;
  }
  return adj;
}

double lambda_min_block(const Topology& topology, const std::vector<MatrixXd>& u_blocks,
                        double tol) {
  if (static_cast<int>(u_blocks.size()) != topology.n_agents)
    throw Error(ErrorCode::DimensionMismatch, "one U block per agent required");
  Eigen::Index p_total = 0;
  for (const auto& u : u_blocks) p_total += u.cols();
  if (p_total == 0) return std::numeric_limits<double>::infinity();

  const Eigen::Index n = u_blocks.front().rows();
  const MatrixXd u = block_diag(u_blocks);
  const MatrixXd lk = kron<double>(topology.laplacian, MatrixXd::Identity(n, n));
  const MatrixXd m = u.transpose() * lk * u;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  if (!(lmin > tol)) {
    std::ostringstream msg;
    msg << "lambda_min(U^T (L kron I) U) = " << lmin
        << "; the stacked pair is not jointly detectable over this graph";
    throw Error(ErrorCode::NotPositiveDefinite, msg.str());
  }
  return lmin;
}

}  // namespace evtobs
