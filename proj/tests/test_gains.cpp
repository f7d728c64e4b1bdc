#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "evtobs/gains.hpp"
#include "evtobs/lyapunov.hpp"
#include "evtobs/scenario.hpp"
#include "oracles.hpp"

using namespace evtobs;

namespace {

using oracle::charpoly;
using oracle::lyapunov;

void check_poles(const MatrixXd& closed, const PoleSet<double>& poles, double tol) {
  const auto got = charpoly(closed);
  const auto want = poly_from_roots(poles);
  REQUIRE(got.size() == want.size());
  for (std::size_t k = 0; k < got.size(); ++k)
    CHECK(static_cast<double>(got[k]) == doctest::Approx(want[k]).epsilon(tol).scale(1.0));
}

MatrixXd random_orthogonal(Eigen::Index p, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatrixXd m(p, p);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return Eigen::HouseholderQR<MatrixXd>(m).householderQ();
}

PoleSet<double> all_minus_one(Eigen::Index n) { return PoleSet<double>(n, {-1.0, 0.0}); }

}  // namespace

TEST_CASE("lyapunov examples") {
  MatrixXd a(1, 1);
  a << -2;
  CHECK(solve_lyapunov<double>(a)(0, 0) == doctest::Approx(0.25));

  MatrixXd d = MatrixXd::Zero(2, 2);
  d(0, 0) = -1, d(1, 1) = -2;
  MatrixXd pd = solve_lyapunov<double>(d);
  CHECK(pd(0, 0) == doctest::Approx(0.5));
  CHECK(pd(1, 1) == doctest::Approx(0.25));
  CHECK(std::abs(pd(0, 1)) < 1e-14);

  MatrixXd c(2, 2);
  c << 0, 1, -1, -2;
  MatrixXd expect(2, 2);
  expect << 1.5, 0.5, 0.5, 0.5;
  const MatrixXd p = solve_lyapunov<double>(c);
  CHECK((p - expect).norm() < 1e-12);
  CHECK((c.transpose() * p + p * c + MatrixXd::Identity(2, 2)).norm() < 1e-12);

  MatrixXd unstable(1, 1);
  unstable << 0.5;
  CHECK_THROWS_WITH_AS(solve_lyapunov<double>(unstable), doctest::Contains("NotHurwitz"), Error);
}

TEST_CASE("lyapunov matches the Kronecker oracle on random Hurwitz matrices") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 12;
    MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
    const double shift = Eigen::EigenSolver<MatrixXd>(a).eigenvalues().real().maxCoeff();
    a -= (shift + 0.5) * MatrixXd::Identity(n, n);
    const MatrixXd p = solve_lyapunov<double>(a);
    CHECK(lyapunov_residual<double>(a, p) <= 1e-8);
    CHECK((p - lyapunov(a)).norm() <= 1e-8 * std::max(1.0, p.norm()));
  }
}

TEST_CASE("single-output placement") {
  MatrixXd a(1, 1), h(1, 1);
  a << 0;
  h << 1;
  CHECK(place_observer_poles<double>(a, h, all_minus_one(1))(0, 0) == doctest::Approx(1.0));

  MatrixXd di(2, 2), h2(1, 2);
  di << 0, 1, 0, 0;
  h2 << 1, 0;
  const MatrixXd l = place_observer_poles<double>(di, h2, all_minus_one(2));
  CHECK(l(0, 0) == doctest::Approx(2.0));
  CHECK(l(1, 0) == doctest::Approx(1.0));

  MatrixXd blind(1, 2);
  blind << 0, 1;
  CHECK_THROWS_WITH_AS(place_observer_poles<double>(di, blind, all_minus_one(2)),
                       doctest::Contains("Unplaceable"), Error);
  CHECK_THROWS_WITH_AS(place_observer_poles<double>(di, h2, {{1.0, 0.0}, {-1.0, 0.0}}),
                       doctest::Contains("BadPoleSet"), Error);
  CHECK_THROWS_WITH_AS(place_observer_poles<double>(di, h2, {{-1.0, 1.0}, {-1.0, 0.0}}),
                       doctest::Contains("BadPoleSet"), Error);
}

TEST_CASE("multi-output placement on random observable systems") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 5, m = 1 + trial % 3;
    MatrixXd a(n, n), h(m, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = g(rng);
    PoleSet<double> poles;
    for (int k = 0; k < n; ++k) poles.emplace_back(-1.0 - 0.5 * k, 0.0);
    if (n >= 3) poles[0] = {-1.0, 2.0}, poles[1] = {-1.0, -2.0};
    const MatrixXd l = place_observer_poles<double>(a, h, poles);
    check_poles(a - l * h, poles, 1e-6);
    const MatrixXd cl = a - l * h;
    const MatrixXd p = solve_lyapunov<double>(cl);
    CHECK(lyapunov_residual<double>(cl, p) <= 1e-8 * std::max(1.0, spectral_norm(cl) * p.norm()));
  }
}

TEST_CASE("non-cyclic A is handled") {
  const MatrixXd a = MatrixXd::Identity(2, 2);
  const MatrixXd h = MatrixXd::Identity(2, 2);
  const PoleSet<double> poles{{-1.0, 0.0}, {-2.0, 0.0}};
  const MatrixXd l = place_observer_poles<double>(a, h, poles);
  check_poles(a - l * h, poles, 1e-8);
}

TEST_CASE("lifted gains") {
  MatrixXd a = MatrixXd::Zero(2, 2), h(1, 2);
  a(0, 0) = 1, a(1, 1) = -1;
  h << 0, 1;
  const auto dec = detectability_decompose(a, h);
  const MatrixXd l_d = place_observer_poles<double>(dec.a_d, dec.h_d, {{-2.0, 0.0}});
  MatrixXd l, m;
  lift_gains(dec, l_d, l, m);
  CHECK(l(0, 0) == doctest::Approx(0.0));
  CHECK(l(1, 0) == doctest::Approx(1.0));
  MatrixXd mexp = MatrixXd::Zero(2, 2);
  mexp(0, 0) = 1;
  CHECK((m - mexp).norm() < 1e-12);

  SUBCASE("p = 0") {
    MatrixXd hs(2, 2);
    hs.setIdentity();
    const auto full = detectability_decompose(a, hs);
    const MatrixXd ld = place_observer_poles<double>(full.a_d, full.h_d, all_minus_one(2));
    lift_gains(full, ld, l, m);
    CHECK(m.norm() == 0.0);
    CHECK((l - full.d * ld).norm() < 1e-12);
  }
  SUBCASE("p = n") {
    MatrixXd di(2, 2);
    di << 0, 1, 0, 0;
    const auto none = detectability_decompose(di, MatrixXd::Zero(1, 2));
    CHECK(none.p == 2);
    lift_gains(none, MatrixXd(0, 1), l, m);
    CHECK((m - MatrixXd::Identity(2, 2)).norm() < 1e-12);
    CHECK(l.norm() == 0.0);
  }
}

TEST_CASE("coupling bounds by plug-in") {
  // Each agent misses one coordinate of a static plant: A_u = 0, lambda_min = 1.
  Plant plant;
  plant.a = MatrixXd::Zero(2, 2);
  plant.h = {MatrixXd::Identity(2, 2).row(0), MatrixXd::Identity(2, 2).row(1)};
  plant.x0 = VectorXd::Zero(2);
  const auto topo = build_topology(adjacency_from_edges(2, {{0, 1, 1.0}}));
  const auto decs = decompose_all(plant);
  CHECK(node_coupling_bound(decs, topo) == doctest::Approx(4.0));
  CHECK(edge_coupling_bound(decs, topo, 0.25) == doctest::Approx(4.0));
  CHECK_THROWS_WITH_AS(edge_coupling_bound(decs, topo, 0.5 - 1e-8), doctest::Contains("BadEpsilon"),
                       Error);
  CHECK(edge_coupling_bound(decs, topo, 0.49) > edge_coupling_bound(decs, topo, 0.4));

  Plant detectable{MatrixXd::Zero(2, 2), {MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2)},
                   VectorXd::Zero(2)};
  CHECK(node_coupling_bound(decompose_all(detectable), topo) == 0.0);
}

TEST_CASE("three-inertia design") {
  const Plant plant{three_inertia_a(), three_inertia_h(), VectorXd::Zero(6)};
  const auto topo = build_topology(benchmark_adjacency());
  DesignRequest req;
  req.c = 10.3;
  const auto design = design_observer(plant, topo, req);

  const double lam = 2.0 - std::sqrt(2.0);
  CHECK(design.lambda_min == doctest::Approx(lam).epsilon(1e-9));
  CHECK(design.norm_au_sym == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(design.norm_a_sym == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(design.c_min == doctest::Approx(2.0 * 4.0 / lam).epsilon(1e-9));
  CHECK(design.c_edge_min == doctest::Approx(4.0 / (0.98 * lam)).epsilon(1e-9));
  CHECK(design.c == 10.3);
  CHECK(design.warnings.size() == 1);

  for (int i = 0; i < 4; ++i) {
    const auto& g = design.agents[i];
    const auto& d = design.decomps[i];
    const Eigen::Index q = 6 - d.p;
    check_poles(d.a_d - g.l_d * d.h_d, all_minus_one(q), 1e-7);
    CHECK(lyapunov_residual<double>(d.a_d - g.l_d * d.h_d, g.p_d) <= 1e-8);
    CHECK((g.m * g.m - g.m).norm() < 1e-12);
    CHECK((g.m - g.m.transpose()).norm() < 1e-12);
    CHECK((g.m * d.u - d.u).norm() < 1e-12);
    CHECK((g.m * d.d).norm() < 1e-12);
    CHECK(spectral_norm(g.m.transpose() * g.m) == doctest::Approx(1.0));
  }
}

TEST_CASE("gain norms are basis invariant") {
  const Plant plant{three_inertia_a(), three_inertia_h(), VectorXd::Zero(6)};
  std::mt19937_64 rng(9);
  for (int i = 0; i < 4; ++i) {
    const auto dec = detectability_decompose(plant, i);
    const MatrixXd l_d = place_detectable<double>(dec.a_d, dec.h_d, all_minus_one(6 - dec.p));
    MatrixXd l, m;
    lift_gains(dec, l_d, l, m);

    AgentDecomposition rot = dec;
    const MatrixXd r = random_orthogonal(dec.d.cols(), rng);
    const MatrixXd q = random_orthogonal(dec.p, rng);
    rot.d = dec.d * r;
    rot.u = dec.u * q;
    rot.t.resize(6, 6);
    rot.t << rot.d, rot.u;
    rot.a_d = r.transpose() * dec.a_d * r;
    rot.a_u = q.transpose() * dec.a_u * q;
    rot.a_r = q.transpose() * dec.a_r * r;
    rot.h_d = dec.h_d * r;
    const MatrixXd l_d2 = place_detectable<double>(rot.a_d, rot.h_d, all_minus_one(6 - dec.p));
    MatrixXd l2, m2;
    lift_gains(rot, l_d2, l2, m2);
    CHECK(spectral_norm(l2) == doctest::Approx(spectral_norm(l)).epsilon(1e-7));
    CHECK((m2 - m).norm() < 1e-10);
    CHECK(spectral_norm(rot.a_u + rot.a_u.transpose()) ==
          doctest::Approx(spectral_norm(dec.a_u + dec.a_u.transpose())).epsilon(1e-10));
  }
}
