#include "evtobs/gains.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "evtobs/lyapunov.hpp"

namespace evtobs {

void lift_gains(const AgentDecomposition& dec, const MatrixXd& l_d, MatrixXd& l, MatrixXd& m) {
  const Eigen::Index n = dec.t.rows();
  const Eigen::Index q = n - dec.p;
  MatrixXd padded = MatrixXd::Zero(n, l_d.cols());
  padded.topRows(q) = l_d;
  l = dec.t * padded;
  m = dec.u * dec.u.transpose();
}

double undetectable_sym_norm(const std::vector<AgentDecomposition>& decomps) {
  std::vector<MatrixXd> blocks;
  for (const auto& d : decomps) blocks.push_back(d.a_u);
  const MatrixXd au = block_diag(blocks);
  return spectral_norm(au + au.transpose());
}

namespace {

std::vector<MatrixXd> u_blocks(const std::vector<AgentDecomposition>& decomps) {
  std::vector<MatrixXd> out;
  for (const auto& d : decomps) out.push_back(d.u);
  return out;
}

}  // namespace

double node_coupling_bound(const std::vector<AgentDecomposition>& decomps,
                           const Topology& topology) {
  const double lmin = lambda_min_block(topology, u_blocks(decomps));
  if (std::isinf(lmin)) return 0.0;
  return 2.0 * (2.0 + undetectable_sym_norm(decomps)) / lmin;
}

double edge_coupling_bound(const std::vector<AgentDecomposition>& decomps,
                           const Topology& topology, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5) || 1.0 - 2.0 * epsilon < 1e-6)
    throw Error(ErrorCode::BadEpsilon, "epsilon must lie in (0, 1/2)");
  const double lmin = lambda_min_block(topology, u_blocks(decomps));
  if (std::isinf(lmin)) return 0.0;
  return (2.0 + undetectable_sym_norm(decomps)) / ((1.0 - 2.0 * epsilon) * lmin);
}

ObserverDesign design_observer(const Plant& plant, const Topology& topology,
                               const DesignRequest& request) {
  if (plant.n_agents() != topology.n_agents)
    throw Error(ErrorCode::DimensionMismatch, "plant and topology disagree on agent count");
  ObserverDesign design;
  design.decomps = decompose_all(plant, request.tol);
  design.epsilon = request.epsilon;

  for (int i = 0; i < plant.n_agents(); ++i) {
    const auto& dec = design.decomps[i];
    const Eigen::Index q = plant.n() - dec.p;
    AgentGains g;
    if (i < static_cast<int>(request.poles.size()) && !request.poles[i].empty())
      g.poles = request.poles[i];
    else
      g.poles.assign(q, {-1.0, 0.0});
    g.l_d = place_detectable<double>(dec.a_d, dec.h_d, g.poles);
    g.p_d = solve_lyapunov<double>(dec.a_d - g.l_d * dec.h_d);
    lift_gains(dec, g.l_d, g.l, g.m);
    design.agents.push_back(std::move(g));
  }

  std::vector<MatrixXd> us;
  for (const auto& d : design.decomps) us.push_back(d.u);
  design.lambda_min = lambda_min_block(topology, us);
  design.norm_au_sym = undetectable_sym_norm(design.decomps);
  design.norm_a_sym = spectral_norm(plant.a + plant.a.transpose());
  design.c_min = node_coupling_bound(design.decomps, topology);
  design.c_edge_min = edge_coupling_bound(design.decomps, topology, request.epsilon);
  design.c = request.c.value_or(design.c_min);
  design.c_edge = request.c_edge.value_or(design.c_edge_min);

  auto warn_below = [&](const char* name, double used, double bound) {
    if (used < bound) {
      std::ostringstream msg;
      msg << name << " = " << used << " is below the sufficient bound " << bound;
      design.warnings.push_back(msg.str());
    }
  };
  warn_below("c", design.c, design.c_min);
  warn_below("c_edge", design.c_edge, design.c_edge_min);
  return design;
}

}  // namespace evtobs
