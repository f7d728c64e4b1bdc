#include "evtobs/trigger.hpp"

#include <algorithm>
#include <sstream>

#include "evtobs/miet.hpp"

namespace evtobs {

namespace {

void check_target(const TargetParams& p, const std::string& who) {
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0))
      throw Error(ErrorCode::ValidationError, std::string(name) + " must be positive for " + who);
  };
  positive(p.kappa, "kappa");
  positive(p.delta, "delta");
  positive(p.gamma, "gamma");
  positive(p.rho0, "rho0");
}

void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw Error(ErrorCode::ValidationError, "beta must lie in (0,1)");
}

MietBound finish(TriggerTarget target, double k, double b, double q, double upper) {
  MietBound out;
  out.target = std::move(target);
  out.coeff_const = k;
  out.coeff_lin = b;
  out.coeff_quad = q;
  out.upper_limit = upper;
  if (!(k > 0.0) || !(b > 0.0) || !(q > 0.0))
    throw Error(ErrorCode::NonpositiveCoefficient,
                "bound polynomial for " + target_label(out.target) + " has a nonpositive coefficient");
  out.value = quadratic_escape_time(k, b, q, upper);
  const double check = quadratic_escape_time_numeric(k, b, q, upper);
  if (std::abs(check - out.value) > 1e-10 * std::abs(check))
    throw Error(ErrorCode::NonFinite, "closed-form bound disagrees with quadrature for " +
                                          target_label(out.target));
  return out;
}

}  // namespace

void validate(const NodeTriggerParams& params, const Topology& topology) {
  check_beta(params.beta);
  if (static_cast<int>(params.agents.size()) != topology.n_agents)
    throw Error(ErrorCode::ValidationError, "node trigger parameters needed for every agent");
  for (int i = 0; i < topology.n_agents; ++i)
    check_target(params.agents[i], "agent " + std::to_string(i + 1));
}

void validate(const EdgeTriggerParams& params, const Topology& topology) {
  check_beta(params.beta);
  for (const auto& e : topology.directed_edges()) {
    const auto it = params.edges.find(e);
    if (it == params.edges.end())
      throw Error(ErrorCode::ValidationError,
                  "edge trigger parameters missing for " + target_label(e));
    check_target(it->second, "edge " + target_label(e));
  }
  if (params.edges.size() != topology.directed_edges().size())
    throw Error(ErrorCode::ValidationError, "edge trigger parameters given for a non-edge");
}

std::string target_label(const TriggerTarget& target) {
  if (const int* i = std::get_if<int>(&target)) return std::to_string(*i + 1);
  const auto& [i, j] = std::get<DirectedEdge>(target);
  std::ostringstream out;
  out << '(' << i + 1 << ',' << j + 1 << ')';
  return out.str();
}

double weighted_disagreement(const std::vector<std::pair<double, VectorXd>>& held_diffs) {
  double sum = 0.0;
  for (const auto& [w, d] : held_diffs) sum += w * d.squaredNorm();
  return sum;
}

double node_trigger_value(const VectorXd& x_tilde_u,
                          const std::vector<std::pair<double, VectorXd>>& held_diffs, double rho,
                          double beta, double kappa, double l_ii) {
  return node_trigger_value(x_tilde_u.squaredNorm(), weighted_disagreement(held_diffs), rho, beta,
                            kappa, l_ii);
}

double edge_trigger_value(const VectorXd& x_tilde_u,
                          const std::vector<std::pair<double, VectorXd>>& held_diffs, double rho,
                          double beta, double kappa, double a_ij, int n_i) {
  return edge_trigger_value(x_tilde_u.squaredNorm(), weighted_disagreement(held_diffs), rho, beta,
                            kappa, a_ij, n_i);
}

MietBound miet_bound_node(int agent, const ObserverDesign& design, const Topology& topology,
                          const NodeTriggerParams& params) {
  const auto& g = design.agents.at(agent);
  const auto& tp = params.agents.at(agent);
  const double l_ii = topology.weighted_degree(agent);
  const double mtm = spectral_norm(g.m.transpose() * g.m);
  const double ltl = spectral_norm(g.l.transpose() * g.l);
  const double k = mtm * l_ii * design.c * design.c / params.beta + ltl / tp.gamma;
  const double b = design.norm_a_sym + tp.delta;
  const double q = 4.0 * l_ii;
  return finish(agent, k, b, q, tp.kappa / (4.0 * l_ii));
}

MietBound miet_bound_edge(const DirectedEdge& edge, const ObserverDesign& design,
                          const Topology& topology, const EdgeTriggerParams& params) {
  const auto [i, j] = edge;
  const double a_ij = topology.weight(i, j);
  if (!(a_ij > 0.0))
    throw Error(ErrorCode::ValidationError, target_label(edge) + " is not an edge of the graph");
  const auto& g = design.agents.at(i);
  const auto& tp = params.edges.at(edge);
  const double l_ii = topology.weighted_degree(i);
  const int n_i = topology.degree_counts[i];
  const double mtm = spectral_norm(g.m.transpose() * g.m);
  const double ltl = spectral_norm(g.l.transpose() * g.l);
  const double k =
      mtm * n_i * l_ii * design.c_edge * design.c_edge / params.beta + ltl / tp.gamma;
  const double b = design.norm_a_sym + tp.delta;
  const double q = 4.0 * a_ij;
  return finish(edge, k, b, q, tp.kappa / (4.0 * a_ij));
}

std::vector<MietBound> miet_bounds_node(const ObserverDesign& design, const Topology& topology,
                                        const NodeTriggerParams& params) {
  std::vector<MietBound> out;
  for (int i = 0; i < topology.n_agents; ++i)
    out.push_back(miet_bound_node(i, design, topology, params));
  return out;
}

std::vector<MietBound> miet_bounds_edge(const ObserverDesign& design, const Topology& topology,
                                        const EdgeTriggerParams& params) {
  std::vector<MietBound> out;
  for (const auto& e : topology.directed_edges())
    out.push_back(miet_bound_edge(e, design, topology, params));
  return out;
}

double default_timeout(double tau_lower) { return std::max(10.0 * tau_lower, 1.0); }

}  // namespace evtobs
