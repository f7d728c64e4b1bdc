#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "evtobs/scenario.hpp"

namespace evtobs {

enum ExitCode : int { kExitOk = 0, kExitInvariant = 1, kExitConfig = 2 };

/// Wide CSV: time, x[k], xhat[i][k], eta[i][k], rho[t], f[t] (1-based).
void write_trajectories_csv(std::ostream& out, const SimResult& result);
/// One row per event: target, instant, cause, f_at_fire, inter_event_time.
void write_events_csv(std::ostream& out, const SimResult& result);
/// Summary document (JSON text) with per-target statistics, design echo,
/// convergence fit and the expanded scenario.
std::string summary_json(const SimConfig& config, const SimSetup& setup, const SimResult& result);

/// False when rho left (0, inf) or an inter-event time undercut its bound.
bool invariants_hold(const SimResult& result);

struct RunOutcome {
  SimSetup setup;
  SimResult result;
  int exit_code = kExitOk;
};

/// Simulates and writes trajectories.csv, events.csv and summary.json into
/// out_dir (created if missing).
RunOutcome run_scenario(const SimConfig& config, const std::string& out_dir);

/// Bound table for every target without simulating.
std::vector<MietBound> scenario_bounds(const SimConfig& config);

struct SweepRow {
  double kappa_0 = 0.0;
  int agent = 0;  // 0-based
  double tau_lower = 0.0;
  std::optional<double> min_iet;
  std::optional<double> mean_iet;
};

/// Replaces every kappa_i by each grid value in turn. Node mode only; the
/// grid must be positive and ascending.
std::vector<SweepRow> sweep_kappa(const SimConfig& config, const std::vector<double>& grid,
                                  bool simulate_runs);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace evtobs
