#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "evtobs/decomp.hpp"
#include "evtobs/gains.hpp"
#include "evtobs/graph.hpp"
#include "evtobs/trigger.hpp"

namespace evtobs {

enum class TriggerMode { Node, Edge };

/// e^{A tau} with memoisation of the durations used repeatedly by the
/// integrator (the step and its half).
class MatrixExpCache {
 public:
  explicit MatrixExpCache(MatrixXd a) : a_(std::move(a)) {}
  const MatrixXd& operator()(double tau);
  const MatrixXd& a() const { return a_; }

 private:
  MatrixXd a_;
  std::unordered_map<double, MatrixXd> cache_;
};

/// e^{A (t - t_k)} v for a held sample (t_k, v); t >= t_k.
VectorXd propagate_held(double sample_time, const VectorXd& sample, const MatrixXd& a, double t);

/// dx^_i/dt for every agent. `held` lists the held values in target order:
/// one per agent (node mode) or one per topology.directed_edges() entry (edge
/// mode), already propagated to the current time.
std::vector<VectorXd> observer_rates(TriggerMode mode, const Plant& plant,
                                     const ObserverDesign& design, const Topology& topology,
                                     const VectorXd& x, const std::vector<VectorXd>& xhat,
                                     const std::vector<VectorXd>& held);

struct SimOptions {
  double duration = 20.0;
  double step = 1e-3;
  int output_stride = 10;     // record every stride-th integration grid point
  double event_tol = 1e-13;   // bisection width for crossing localisation
  double crossing_tol = 1e-12;
};

/// Resolved inputs of one run. Trigger parameters for the inactive mode are
/// ignored. Empty tau_bar entries are replaced by default_timeout(tau).
struct SimSetup {
  Plant plant;
  Topology topology;
  ObserverDesign design;
  TriggerMode mode = TriggerMode::Node;
  NodeTriggerParams node;
  EdgeTriggerParams edge;
  std::vector<VectorXd> xhat0;
  SimOptions options;
};

enum class EventCause { Threshold, Timeout };

struct EventRecord {
  TriggerTarget target;
  int target_index = 0;
  double instant = 0.0;
  EventCause cause = EventCause::Threshold;
  double f_at_fire = 0.0;
  double inter_event_time = 0.0;
};

struct TargetSummary {
  TriggerTarget target;
  int count = 0;
  int threshold_count = 0;
  int timeout_count = 0;
  double min_iet = 0.0;  // +inf without events
  double mean_iet = 0.0;
  double tau_lower = 0.0;
  double tau_bar = 0.0;
  bool bound_satisfied = true;
};

struct SimResult {
  TriggerMode mode = TriggerMode::Node;
  std::vector<TriggerTarget> targets;
  int state_dim = 0;
  int n_agents = 0;
  std::vector<double> time;
  std::vector<VectorXd> state;                 // x
  std::vector<std::vector<VectorXd>> estimate;  // [grid][agent] x^_i
  std::vector<VectorXd> rho;                   // [grid][target]
  std::vector<VectorXd> f;                     // [grid][target]
  std::vector<VectorXd> psi;                   // ||x~||^2 / rho
  std::vector<VectorXd> psi_bar;               // trigger ratio, fires at 1
  std::vector<EventRecord> events;
  std::vector<TargetSummary> summary;
  std::vector<MietBound> bounds;
  // Structural diagnostics over every accepted integration node.
  double min_rho = 0.0;
  double max_f_between_events = 0.0;
  long accepted_steps = 0;

  /// ||col{x^_i - x}|| on the output grid.
  std::vector<double> error_norms() const;
};

/// Runs the hybrid system until options.duration. Throws RhoNonPositive,
/// NonFinite or ConfigInvalid.
SimResult simulate(const SimSetup& setup);

struct ConvergenceFit {
  double slope = 0.0;        // least-squares slope of log ||eta|| over the second half
  double initial_error = 0.0;
  double final_error = 0.0;
};
ConvergenceFit convergence_fit(const SimResult& result);

}  // namespace evtobs
