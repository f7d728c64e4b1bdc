#include "evtobs/report.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <json.hpp>

namespace evtobs {

namespace {

using nlohmann::json;

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string cause_name(EventCause c) { return c == EventCause::Threshold ? "threshold" : "timeout"; }

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void write_trajectories_csv(std::ostream& out, const SimResult& r) {
  const int n = r.state_dim;
  const int agents = r.n_agents;
  out << "time";
  for (int k = 0; k < n; ++k) out << ",x[" << k + 1 << ']';
  for (const char* name : {"xhat", "eta"})
    for (int i = 0; i < agents; ++i)
      for (int k = 0; k < n; ++k) out << ',' << name << '[' << i + 1 << "][" << k + 1 << ']';
  for (const char* name : {"rho", "f"})
    for (const auto& t : r.targets) out << ',' << name << '[' << target_label(t) << ']';
  out << '\n';
  for (std::size_t g = 0; g < r.time.size(); ++g) {
    out << num(r.time[g]);
    for (int k = 0; k < n; ++k) out << ',' << num(r.state[g](k));
    for (int i = 0; i < agents; ++i)
      for (int k = 0; k < n; ++k) out << ',' << num(r.estimate[g][i](k));
    for (int i = 0; i < agents; ++i)
      for (int k = 0; k < n; ++k) out << ',' << num(r.estimate[g][i](k) - r.state[g](k));
    for (Eigen::Index k = 0; k < r.rho[g].size(); ++k) out << ',' << num(r.rho[g](k));
    for (Eigen::Index k = 0; k < r.f[g].size(); ++k) out << ',' << num(r.f[g](k));
    out << '\n';
  }
}

void write_events_csv(std::ostream& out, const SimResult& r) {
  out << "target,instant,cause,f_at_fire,inter_event_time\n";
  for (const auto& e : r.events)
    out << '"' << target_label(e.target) << "\"," << num(e.instant) << ',' << cause_name(e.cause)
        << ',' << num(e.f_at_fire) << ',' << num(e.inter_event_time) << '\n';
}

bool invariants_hold(const SimResult& r) {
  if (!(r.min_rho > 0.0)) return false;
  for (const auto& s : r.summary)
    if (!s.bound_satisfied) return false;
  return true;
}

std::string summary_json(const SimConfig& config, const SimSetup& setup, const SimResult& r) {
  json doc;
  doc["scenario"] = config.name;
  doc["mode"] = r.mode == TriggerMode::Node ? "node" : "edge";
  doc["seed"] = config.seed;
  doc["duration"] = config.duration;
  doc["step"] = config.step;

  json targets = json::array();
  for (const auto& s : r.summary) {
    targets.push_back({{"target", target_label(s.target)},
                       {"count", s.count},
                       {"threshold_events", s.threshold_count},
                       {"timeout_events", s.timeout_count},
                       {"min_iet", finite_or_null(s.count ? s.min_iet : NAN)},
                       {"mean_iet", finite_or_null(s.count ? s.mean_iet : NAN)},
                       {"tau_lower", s.tau_lower},
                       {"tau_bar", s.tau_bar},
                       {"bound_satisfied", s.bound_satisfied}});
  }
  doc["targets"] = targets;
  doc["event_count"] = r.events.size();

  const auto& d = setup.design;
  json design;
  if (r.mode == TriggerMode::Node) {
    design["c_min"] = d.c_min;
    design["c"] = d.c;
  } else {
    design["c_edge_min"] = d.c_edge_min;
    design["c_edge"] = d.c_edge;
    design["epsilon"] = d.epsilon;
  }
  design["lambda_min"] = finite_or_null(d.lambda_min);
  design["norm_au_sym"] = d.norm_au_sym;
  design["norm_a_sym"] = d.norm_a_sym;
  json poles = json::array(), dims = json::array();
  for (std::size_t i = 0; i < d.agents.size(); ++i) {
    json set = json::array();
    for (const auto& p : d.agents[i].poles) set.push_back({p.real(), p.imag()});
    poles.push_back(set);
    dims.push_back(d.decomps[i].p);
  }
  design["poles"] = poles;
  design["p"] = dims;
  design["warnings"] = d.warnings;
  doc["design"] = design;

  const ConvergenceFit fit = convergence_fit(r);
  json conv;
  conv["slope"] = fit.slope;
  conv["initial_error"] = fit.initial_error;
  conv["final_error"] = fit.final_error;
  json per_agent = json::array();
  if (!r.time.empty())
    for (std::size_t i = 0; i < r.estimate.back().size(); ++i)
      per_agent.push_back((r.estimate.back()[i] - r.state.back()).norm());
  conv["final_error_per_agent"] = per_agent;
  doc["convergence"] = conv;

  doc["invariants"] = {{"min_rho", r.min_rho},
                       {"max_f_between_events", finite_or_null(r.max_f_between_events)},
                       {"holds", invariants_hold(r)}};
  doc["config"] = emit_scenario(config);
  return doc.dump(2) + "\n";
}

RunOutcome run_scenario(const SimConfig& config, const std::string& out_dir) {
  RunOutcome outcome;
  outcome.setup = make_setup(config);
  outcome.result = simulate(outcome.setup);
  outcome.exit_code = invariants_hold(outcome.result) ? kExitOk : kExitInvariant;

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  std::ostringstream traj, events;
  write_trajectories_csv(traj, outcome.result);
  write_events_csv(events, outcome.result);
  write_file(dir / "trajectories.csv", traj.str());
  write_file(dir / "events.csv", events.str());
  write_file(dir / "summary.json", summary_json(config, outcome.setup, outcome.result));
  return outcome;
}

std::vector<MietBound> scenario_bounds(const SimConfig& config) {
  const SimSetup setup = make_setup(config);
  if (setup.mode == TriggerMode::Node)
    return miet_bounds_node(setup.design, setup.topology, setup.node);
  return miet_bounds_edge(setup.design, setup.topology, setup.edge);
}

std::vector<SweepRow> sweep_kappa(const SimConfig& config, const std::vector<double>& grid,
                                  bool simulate_runs) {
  if (config.mode != TriggerMode::Node)
    throw Error(ErrorCode::ValidationError, "sweep-kappa requires a node-mode scenario");
  if (grid.empty()) throw Error(ErrorCode::ValidationError, "kappa grid is empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0)) throw Error(ErrorCode::ValidationError, "kappa grid must be positive");
    if (k > 0 && !(grid[k] > grid[k - 1]))
      throw Error(ErrorCode::ValidationError, "kappa grid must be ascending");
  }
  std::vector<SweepRow> rows;
  for (double kappa : grid) {
    SimConfig cfg = config;
    for (auto& p : cfg.node.agents) p.kappa = kappa;
    const SimSetup setup = make_setup(cfg);
    const auto bounds = miet_bounds_node(setup.design, setup.topology, setup.node);
    std::optional<SimResult> result;
    if (simulate_runs) result = simulate(setup);
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      SweepRow row;
      row.kappa_0 = kappa;
      row.agent = static_cast<int>(i);
      row.tau_lower = bounds[i].value;
      if (result && result->summary[i].count > 0) {
        row.min_iet = result->summary[i].min_iet;
        row.mean_iet = result->summary[i].mean_iet;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "kappa_0,agent,tau_lower,min_iet,mean_iet\n";
  for (const auto& r : rows) {
    out << num(r.kappa_0) << ',' << r.agent + 1 << ',' << num(r.tau_lower) << ',';
    if (r.min_iet) out << num(*r.min_iet);
    out << ',';
    if (r.mean_iet) out << num(*r.mean_iet);
    out << '\n';
  }
}

}  // namespace evtobs
