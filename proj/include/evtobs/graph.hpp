#pragma once

#include <limits>
#include <tuple>
#include <utility>
#include <vector>

#include "evtobs/linalg.hpp"

namespace evtobs {

/// Undirected weighted communication graph with its Laplacian.
struct Topology {
  int n_agents = 0;
  MatrixXd adjacency;
  MatrixXd laplacian;
  std::vector<std::vector<int>> neighbors;  // ascending agent indices
  std::vector<int> degree_counts;           // N_i = |neighbors[i]|

  double weight(int i, int j) const { return adjacency(i, j); }
  double weighted_degree(int i) const { return laplacian(i, i); }

  /// Ordered pairs (i, j) with j a neighbour of i, sorted lexicographically.
  std::vector<std::pair<int, int>> directed_edges() const;
};

/// Validates the adjacency matrix and derives the Laplacian and neighbour
/// sets. Throws NotSymmetric, NonzeroDiagonal or Disconnected; connectivity is
/// judged by the second-smallest Laplacian eigenvalue exceeding `tol`.
Topology build_topology(const MatrixXd& adjacency, double tol = 1e-9);

/// Adjacency for an edge list of 0-based (i, j, weight) triples.
MatrixXd adjacency_from_edges(int n_agents,
                              const std::vector<std::tuple<int, int, double>>& edges);

/// lambda_min(U^T (L ⊗ I_n) U) with U = blockdiag(u_blocks). Each block is
/// n x p_i. Returns +infinity when every p_i is zero. Throws
/// NotPositiveDefinite when the minimum eigenvalue is not above `tol`.
double lambda_min_block(const Topology& topology, const std::vector<MatrixXd>& u_blocks,
                        double tol = 1e-9);

}  // namespace evtobs
