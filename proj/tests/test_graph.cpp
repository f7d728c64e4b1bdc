#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "evtobs/decomp.hpp"
#include "evtobs/graph.hpp"
#include "evtobs/scenario.hpp"

using namespace evtobs;

namespace {

MatrixXd random_orthogonal(Eigen::Index p, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatrixXd m(p, p);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return Eigen::HouseholderQR<MatrixXd>(m).householderQ();
}

// Straight assembly of U^T (L ⊗ I) U entry by entry, then a dense eigensolve.
double lambda_min_oracle(const MatrixXd& lap, const std::vector<MatrixXd>& us) {
  const Eigen::Index n = us[0].rows();
  Eigen::Index total = 0;
  std::vector<Eigen::Index> off;
  for (const auto& u : us) off.push_back(total), total += u.cols();
  MatrixXd m = MatrixXd::Zero(total, total);
  for (std::size_t i = 0; i < us.size(); ++i)
    for (std::size_t j = 0; j < us.size(); ++j)
      for (Eigen::Index a = 0; a < us[i].cols(); ++a)
        for (Eigen::Index b = 0; b < us[j].cols(); ++b) {
          double s = 0;
          for (Eigen::Index k = 0; k < n; ++k) s += us[i](k, a) * lap(i, j) * us[j](k, b);
          m(off[i] + a, off[j] + b) = s;
        }
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(m).eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("laplacian of small graphs") {
  const auto two = build_topology(adjacency_from_edges(2, {{0, 1, 1.0}}));
  MatrixXd expect(2, 2);
  expect << 1, -1, -1, 1;
  CHECK(two.laplacian.isApprox(expect));

  const auto path = build_topology(adjacency_from_edges(3, {{0, 1, 1.0}, {1, 2, 1.0}}));
  MatrixXd p(3, 3);
  p << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK(path.laplacian.isApprox(p));
  CHECK(path.neighbors[1] == std::vector<int>{0, 2});
}

TEST_CASE("benchmark ring") {
  const auto topo = build_topology(benchmark_adjacency());
  for (int i = 0; i < 4; ++i) {
    CHECK(topo.weighted_degree(i) == 2.0);
    CHECK(topo.degree_counts[i] == 2);
  }
  const auto edges = topo.directed_edges();
  REQUIRE(edges.size() == 8);
  CHECK(edges.front() == DirectedEdge{0, 1});
  CHECK(edges.back() == DirectedEdge{3, 2});
  CHECK(std::is_sorted(edges.begin(), edges.end()));
}

TEST_CASE("topology errors") {
  MatrixXd asym = MatrixXd::Zero(2, 2);
  asym(0, 1) = 1;
  CHECK_THROWS_WITH_AS(build_topology(asym), doctest::Contains("NotSymmetric"), Error);

  MatrixXd diag = MatrixXd::Ones(2, 2);
  CHECK_THROWS_WITH_AS(build_topology(diag), doctest::Contains("NonzeroDiagonal"), Error);

  const MatrixXd split = adjacency_from_edges(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  CHECK_THROWS_WITH_AS(build_topology(split), doctest::Contains("Disconnected"), Error);

  CHECK_THROWS_AS(build_topology(adjacency_from_edges(2, {{0, 1, -1.0}})), Error);
}

TEST_CASE("laplacian rows sum to zero and spectrum is nonnegative") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> w(0.1, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 7;
    std::vector<std::tuple<int, int, double>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1, w(rng));
    for (int i = 0; i + 2 < n; i += 2) edges.emplace_back(i, i + 2, w(rng));
    const auto topo = build_topology(adjacency_from_edges(n, edges));
    CHECK(topo.laplacian.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(topo.laplacian);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
  }
}

TEST_CASE("lambda_min_block") {
  SUBCASE("all detectable gives +inf") {
    const auto topo = build_topology(benchmark_adjacency());
    std::vector<MatrixXd> empty(4, MatrixXd(6, 0));
    CHECK(std::isinf(lambda_min_block(topo, empty)));
  }
  SUBCASE("identical subspaces on a 2-clique") {
    const auto topo = build_topology(adjacency_from_edges(2, {{0, 1, 1.0}}));
    std::vector<MatrixXd> us(2, MatrixXd::Identity(2, 2).leftCols(1));
    CHECK_THROWS_WITH_AS(lambda_min_block(topo, us), doctest::Contains("NotPositiveDefinite"), Error);
  }
  SUBCASE("benchmark against dense oracle and basis rotations") {
    const auto topo = build_topology(benchmark_adjacency());
    Plant plant{three_inertia_a(), three_inertia_h(), VectorXd::Zero(6)};
    const auto decs = decompose_all(plant);
    std::vector<MatrixXd> us;
    Eigen::Index total = 0;
    for (const auto& d : decs) us.push_back(d.u), total += d.p;
    CHECK(total == 10);
    const double lm = lambda_min_block(topo, us);
    CHECK(lm == doctest::Approx(lambda_min_oracle(topo.laplacian, us)).epsilon(1e-10));
    CHECK(lm == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-9));

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<MatrixXd> rotated;
      for (const auto& u : us) rotated.push_back(u * random_orthogonal(u.cols(), rng));
      CHECK(lambda_min_block(topo, rotated) == doctest::Approx(lm).epsilon(1e-10));
    }
  }
}
