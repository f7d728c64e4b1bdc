#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evtobs/sim.hpp"

namespace evtobs {

/// Fully expanded description of one run: every per-target map is explicit,
/// whatever shorthand the scenario file used.
struct SimConfig {
  std::string name;

  std::string plant_builtin;  // label only; a and h are always populated
  MatrixXd a;
  std::vector<MatrixXd> h;
  MatrixXd adjacency;

  TriggerMode mode = TriggerMode::Node;
  NodeTriggerParams node;  // populated in node mode
  EdgeTriggerParams edge;  // populated in edge mode

  std::vector<PoleSet<double>> poles;  // per agent; empty entry uses pole_default
  double pole_default = -1.0;
  std::optional<double> c;
  std::optional<double> c_edge;
  double epsilon = 0.01;

  double duration = 20.0;
  double step = 1e-3;
  int output_stride = 10;
  std::uint64_t seed = 1;
  std::optional<VectorXd> x0;                  // random from seed when unset
  std::optional<std::vector<VectorXd>> xhat0;  // random from seed when unset
  std::string out_dir = "out";

  bool operator==(const SimConfig&) const;
};

/// The three-inertia benchmark with four single-output agents.
MatrixXd three_inertia_a(double k_over_j = 1.0);
std::vector<MatrixXd> three_inertia_h();
/// Ring 1-2-4-3-1 with unit weights.
MatrixXd benchmark_adjacency();

std::vector<std::string> builtin_scenario_names();
/// Throws ConfigInvalid for an unknown name.
SimConfig builtin_scenario(const std::string& name);

/// Parses the YAML scenario schema documented in README.md. Throws ParseError
/// (with line and field) or ValidationError.
SimConfig parse_scenario(const std::string& text, const std::string& origin = "<string>");
SimConfig load_scenario(const std::string& path);
/// A builtin name or a file path.
SimConfig resolve_scenario(const std::string& name_or_path);

/// Serialises every field; parse_scenario(emit_scenario(c)) == c.
std::string emit_scenario(const SimConfig& config);

/// Dimension, range and topology checks. Throws ValidationError or the
/// build_topology errors.
void validate_config(const SimConfig& config);

/// Uniform on [-5, 5] per coordinate: x(0) first, then each x^_i(0).
void random_initial_conditions(std::uint64_t seed, int n, int n_agents, VectorXd& x0,
                               std::vector<VectorXd>& xhat0);

/// Validates, designs the observer and resolves initial conditions.
SimSetup make_setup(const SimConfig& config);

}  // namespace evtobs
