#pragma once

#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "evtobs/gains.hpp"
#include "evtobs/graph.hpp"

namespace evtobs {

/// Per-target constants of a dynamic triggering rule.
struct TargetParams {
  double kappa = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  double rho0 = 1.0;
  double tau_bar = 0.0;  // <= 0 selects the default timeout
};

struct NodeTriggerParams {
  double beta = 0.9;
  std::vector<TargetParams> agents;
};

using DirectedEdge = std::pair<int, int>;

struct EdgeTriggerParams {
  double beta = 0.9;
  std::map<DirectedEdge, TargetParams> edges;
};

/// Throws ValidationError naming the violated constraint.
void validate(const NodeTriggerParams& params, const Topology& topology);
void validate(const EdgeTriggerParams& params, const Topology& topology);

/// Either an agent index or a directed edge (i, j).
using TriggerTarget = std::variant<int, DirectedEdge>;
std::string target_label(const TriggerTarget& target);  // "1" or "(1,2)", 1-based

/// Coefficients and value of the guaranteed inter-event time
/// tau = \int_0^upper ds / (coeff_quad s^2 + coeff_lin s + coeff_const).
struct MietBound {
  TriggerTarget target;
  double coeff_const = 0.0;
  double coeff_lin = 0.0;
  double coeff_quad = 0.0;
  double upper_limit = 0.0;
  double value = 0.0;
};

// Trigger functions and internal-variable rates. `xtu_sq` is ||x~_u||^2,
// `disagreement` the weighted sum of squared held-value differences, and
// `innovation_sq` ||H_i x^_i - y_i||^2.

inline double node_trigger_value(double xtu_sq, double disagreement, double rho, double beta,
                                 double kappa, double l_ii) {
  return 4.0 * l_ii * xtu_sq - beta * disagreement - kappa * rho;
}

inline double node_rho_rate(double xtu_sq, double disagreement, double innovation_sq, double rho,
                            double beta, double delta, double gamma, double l_ii) {
  return -delta * rho - 4.0 * l_ii * xtu_sq + beta * disagreement + gamma * innovation_sq;
}

inline double edge_trigger_value(double xtu_sq, double disagreement, double rho, double beta,
                                 double kappa, double a_ij, int n_i) {
  return 4.0 * a_ij * xtu_sq - beta / n_i * disagreement - kappa * rho;
}

inline double edge_rho_rate(double xtu_sq, double disagreement, double innovation_sq, double rho,
                            double beta, double delta, double gamma, double a_ij, int n_i) {
  return -delta * rho - 4.0 * a_ij * xtu_sq + beta / n_i * disagreement + gamma * innovation_sq;
}

/// Weighted disagreement sum_j a_ij ||v_i - v_j||^2 from (a_ij, v_i - v_j) pairs.
double weighted_disagreement(const std::vector<std::pair<double, VectorXd>>& held_diffs);

/// Vector forms: f_i from the undetectable part of the sample error and the
/// held-value differences to each neighbour.
double node_trigger_value(const VectorXd& x_tilde_u,
                          const std::vector<std::pair<double, VectorXd>>& held_diffs, double rho,
                          double beta, double kappa, double l_ii);
double edge_trigger_value(const VectorXd& x_tilde_u,
                          const std::vector<std::pair<double, VectorXd>>& held_diffs, double rho,
                          double beta, double kappa, double a_ij, int n_i);

MietBound miet_bound_node(int agent, const ObserverDesign& design, const Topology& topology,
                          const NodeTriggerParams& params);
MietBound miet_bound_edge(const DirectedEdge& edge, const ObserverDesign& design,
                          const Topology& topology, const EdgeTriggerParams& params);

std::vector<MietBound> miet_bounds_node(const ObserverDesign& design, const Topology& topology,
                                        const NodeTriggerParams& params);
std::vector<MietBound> miet_bounds_edge(const ObserverDesign& design, const Topology& topology,
                                        const EdgeTriggerParams& params);

/// Timeout used when a target leaves tau_bar unset: max(10 tau, 1 s).
double default_timeout(double tau_lower);

}  // namespace evtobs
