#include <doctest.h>

#include <cmath>
#include <random>

#include "evtobs/miet.hpp"
#include "evtobs/scenario.hpp"
#include "evtobs/trigger.hpp"
#include "oracles.hpp"

using namespace evtobs;

namespace {

struct Bench {
  Plant plant{three_inertia_a(), three_inertia_h(), VectorXd::Zero(6)};
  Topology topo = build_topology(benchmark_adjacency());
  ObserverDesign design;

  Bench() {
    DesignRequest req;
    req.c = 10.3;
    req.c_edge = 5.3;
    design = design_observer(plant, topo, req);
  }

  NodeTriggerParams node(double kappa, double delta, double gamma) const {
    NodeTriggerParams p;
    p.beta = 0.9;
    p.agents.assign(4, TargetParams{kappa, delta, gamma, 1.0, 0.0});
    return p;
  }
  EdgeTriggerParams edge(double kappa, double delta, double gamma) const {
    EdgeTriggerParams p;
    p.beta = 0.9;
    for (const auto& e : topo.directed_edges()) p.edges[e] = TargetParams{kappa, delta, gamma, 1.0, 0.0};
    return p;
  }
};

}  // namespace

TEST_CASE("node trigger and rate plug-ins") {
  CHECK(node_trigger_value(0.0, 0.0, 1.0, 0.9, 0.03, 2.0) == doctest::Approx(-0.03));
  CHECK(node_trigger_value(1.0, 1.0, 1.0, 0.9, 0.03, 2.0) == doctest::Approx(7.07));
  CHECK(node_trigger_value(0.0, 3.0, 2.0, 0.9, 0.5, 2.0) < 0.0);

  CHECK(node_rho_rate(0, 0, 0, 1.0, 0.9, 2.0, 10.0, 2.0) == doctest::Approx(-2.0));
  CHECK(node_rho_rate(0, 0, 0, 3.0, 0.9, 0.5, 10.0, 2.0) == doctest::Approx(-1.5));
  // delta rho = 1, 4 l ||x~||^2 = 2, beta sum = 2, gamma ||.||^2 = 1
  CHECK(node_rho_rate(0.25, 2.0 / 0.9, 0.1, 1.0, 0.9, 1.0, 10.0, 2.0) == doctest::Approx(0.0));

  VectorXd xtu = VectorXd::Zero(2);
  xtu(0) = 1.0;
  std::vector<std::pair<double, VectorXd>> diffs{{1.0, VectorXd::Ones(1)}};
  CHECK(node_trigger_value(xtu, diffs, 1.0, 0.9, 0.03, 2.0) == doctest::Approx(7.07));
}

TEST_CASE("edge trigger and rate plug-ins") {
  CHECK(edge_trigger_value(0.0, 0.0, 1.0, 0.9, 100.0, 1.0, 2) < 0.0);
  CHECK(edge_trigger_value(25.0, 0.0, 1.0, 0.9, 100.0, 1.0, 2) == doctest::Approx(0.0));
  CHECK(edge_trigger_value(0.0, 2.0, 0.0, 0.9, 100.0, 1.0, 2) == doctest::Approx(-0.9));

  CHECK(edge_rho_rate(0, 0, 0, 1.0, 0.9, 1.0, 1.0, 1.0, 2) == doctest::Approx(-1.0));
  CHECK(edge_rho_rate(0, 0, 0, 2.0, 0.9, 1.0, 1.0, 1.0, 2) == doctest::Approx(-2.0));
  // delta rho = 1, 4 a ||x~||^2 = 2, beta/N sum = 2, gamma ||.||^2 = 1
  CHECK(edge_rho_rate(0.5, 4.0 / 0.9, 1.0, 1.0, 0.9, 1.0, 1.0, 1.0, 2) == doctest::Approx(0.0));
}

TEST_CASE("escape-time integral") {
  const double pi = std::acos(-1.0);
  CHECK(quadratic_escape_time(1.0, 0.0, 1.0, 1.0) == doctest::Approx(pi / 4).epsilon(1e-14));
  CHECK(quadratic_escape_time(1.0, 2.0, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(quadratic_escape_time(1.0, 3.0, 1.0, 0.0) == 0.0);
  CHECK_THROWS_WITH_AS(quadratic_escape_time(0.0, 1.0, 1.0, 1.0),
                       doctest::Contains("NonpositiveCoefficient"), Error);

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> lg(-4.0, 4.0);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double k = std::pow(10.0, lg(rng)), b = std::pow(10.0, lg(rng)),
                 q = std::pow(10.0, lg(rng)), u = std::pow(10.0, lg(rng) / 2);
    const double closed = quadratic_escape_time(k, b, q, u);
    const double ref = oracle::escape_time(k, b, q, u);
    CHECK(std::abs(closed - ref) <= 1e-9 * ref);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("benchmark node bounds") {
  const Bench bench;
  const auto bounds = miet_bounds_node(bench.design, bench.topo, bench.node(30.0, 6.0, 10.0));
  REQUIRE(bounds.size() == 4);
  for (const auto& b : bounds) {
    CHECK(b.value >= 0.0131);
    CHECK(b.value <= 0.0133);
    CHECK(b.upper_limit == doctest::Approx(30.0 / 8.0));
  }
  CHECK(bounds[1].value == doctest::Approx(bounds[2].value).epsilon(1e-12));
}

TEST_CASE("benchmark edge bounds") {
  const Bench bench;
  const auto bounds = miet_bounds_edge(bench.design, bench.topo, bench.edge(100.0, 1.0, 1.0));
  REQUIRE(bounds.size() == 8);
  // (1,2) and (1,3) share every ingredient of the bound.
  CHECK(bounds[0].value == doctest::Approx(bounds[1].value).epsilon(1e-12));
  for (const auto& b : bounds) {
    CHECK(b.value > 0.053 * 0.85);
    CHECK(b.value < 0.060 * 1.15);
  }
}

TEST_CASE("bound monotonicity") {
  Bench bench;
  for (int agent = 0; agent < 4; ++agent) {
    double prev = 0.0;
    for (double kappa : {0.03, 0.3, 3.0, 30.0}) {
      const double v = miet_bound_node(agent, bench.design, bench.topo, bench.node(kappa, 2.0, 10.0)).value;
      CHECK(v > prev);
      prev = v;
    }
    prev = 1e9;
    for (double delta : {0.5, 1.0, 2.0, 6.0}) {
      const double v = miet_bound_node(agent, bench.design, bench.topo, bench.node(30.0, delta, 10.0)).value;
      CHECK(v < prev);
      prev = v;
    }
  }
  double prev = 1e9;
  for (double c : {10.3, 13.7, 20.0, 40.0}) {
    bench.design.c = c;
    const double v = miet_bound_node(0, bench.design, bench.topo, bench.node(30.0, 6.0, 10.0)).value;
    CHECK(v < prev);
    prev = v;
  }
  prev = 1e9;
  for (double c : {5.3, 7.0, 10.0}) {
    bench.design.c_edge = c;
    const double v = miet_bound_edge({0, 1}, bench.design, bench.topo, bench.edge(100.0, 1.0, 1.0)).value;
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("heavier edge weight shrinks the bound") {
  Bench bench;
  double prev = 1e9;
  for (double w : {1.0, 4.0, 16.0, 64.0}) {
    MatrixXd adj = benchmark_adjacency();
    adj(0, 1) = adj(1, 0) = w;
    const auto topo = build_topology(adj);
    const double v = miet_bound_edge({0, 1}, bench.design, topo, bench.edge(100.0, 1.0, 1.0)).value;
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("parameter validation") {
  const Bench bench;
  auto p = bench.node(1.0, 1.0, 1.0);
  p.beta = 1.2;
  CHECK_THROWS_WITH_AS(validate(p, bench.topo), doctest::Contains("beta must lie in (0,1)"), Error);
  p.beta = 0.5;
  p.agents[2].gamma = 0.0;
  CHECK_THROWS_WITH_AS(validate(p, bench.topo), doctest::Contains("gamma"), Error);
  auto e = bench.edge(1.0, 1.0, 1.0);
  e.edges.erase({3, 2});
  CHECK_THROWS_WITH_AS(validate(e, bench.topo), doctest::Contains("(4,3)"), Error);
  CHECK(target_label(TriggerTarget{2}) == "3");
  CHECK(target_label(TriggerTarget{DirectedEdge{0, 1}}) == "(1,2)");
  CHECK(default_timeout(0.5) == 5.0);
  CHECK(default_timeout(1e-5) == 1.0);
}
