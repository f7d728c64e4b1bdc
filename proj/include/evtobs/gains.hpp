#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "evtobs/decomp.hpp"
#include "evtobs/graph.hpp"
#include "evtobs/pole_placement.hpp"

namespace evtobs {

/// Per-agent observer gains.
struct AgentGains {
  MatrixXd l_d;  // (n-p) x m   output injection on the detectable block
  MatrixXd l;    // n x m       lifted gain T [L_d; 0]
  MatrixXd m;    // n x n       orthogonal projector onto U_i
  MatrixXd p_d;  // (n-p) x (n-p) Lyapunov certificate
  PoleSet<double> poles;
};

struct ObserverDesign {
  std::vector<AgentDecomposition> decomps;
  std::vector<AgentGains> agents;
  double lambda_min = 0.0;  // lambda_min(U^T (L ⊗ I) U); +inf when all p_i = 0
  double norm_au_sym = 0.0;  // ||A_u + A_u^T||
  double norm_a_sym = 0.0;   // ||A + A^T||
  double c_min = 0.0;
  double c = 0.0;
  double c_edge_min = 0.0;
  double c_edge = 0.0;
  double epsilon = 0.0;
  std::vector<std::string> warnings;
};

/// L_i = T_i [L_d; 0] and M_i = T_i blockdiag(0, I_p) T_i^T.
void lift_gains(const AgentDecomposition& dec, const MatrixXd& l_d, MatrixXd& l, MatrixXd& m);

/// 2 (2 + ||A_u + A_u^T||) / lambda_min; 0 when no agent has an undetectable
/// subspace.
double node_coupling_bound(const std::vector<AgentDecomposition>& decomps,
                           const Topology& topology);

/// (2 + ||A_u + A_u^T||) / ((1 - 2 eps) lambda_min). Throws BadEpsilon unless
/// 0 < eps < 1/2 with 1 - 2 eps >= 1e-6.
double edge_coupling_bound(const std::vector<AgentDecomposition>& decomps,
                           const Topology& topology, double epsilon);

/// ||blockdiag(A_iu) + blockdiag(A_iu)^T||.
double undetectable_sym_norm(const std::vector<AgentDecomposition>& decomps);

struct DesignRequest {
  std::vector<PoleSet<double>> poles;  // per agent; empty entry means all -1
  std::optional<double> c;             // node coupling gain; defaults to c_min
  std::optional<double> c_edge;        // edge coupling gain; defaults to c_edge_min
  double epsilon = 0.01;
  DecompTolerances tol;
};

/// Full synthesis: decomposition, pole placement, Lyapunov certificates and
/// coupling gains. A user gain below its bound is kept and reported in
/// `warnings`, since the bound is sufficient rather than necessary.
ObserverDesign design_observer(const Plant& plant, const Topology& topology,
                               const DesignRequest& request);

}  // namespace evtobs
