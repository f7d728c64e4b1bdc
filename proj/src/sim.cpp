#include "evtobs/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace evtobs {

const MatrixXd& MatrixExpCache::operator()(double tau) {
  auto it = cache_.find(tau);
  if (it != cache_.end()) return it->second;
  if (cache_.size() > 256) cache_.clear();
  return cache_.emplace(tau, MatrixXd((a_ * tau).exp())).first->second;
}

VectorXd propagate_held(double sample_time, const VectorXd& sample, const MatrixXd& a, double t) {
  const double dt = t - sample_time;
  if (dt == 0.0) return sample;
  return MatrixXd((a * dt).exp()) * sample;
}

std::vector<double> SimResult::error_norms() const {
  std::vector<double> out(time.size());
  for (std::size_t g = 0; g < time.size(); ++g) {
    double sq = 0.0;
    for (const auto& xh : estimate[g]) sq += (xh - state[g]).squaredNorm();
    out[g] = std::sqrt(sq);
  }
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct TargetInfo {
  TriggerTarget target;
  int owner = 0;     // agent whose estimate is sampled
  double weight4 = 0.0;      // 4 l_ii (node) or 4 a_ij (edge)
  double beta_scaled = 0.0;  // beta (node) or beta / N_i (edge)
  TargetParams p;
  double tau_lower = 0.0;
};

struct Sample {
  double time = 0.0;
  VectorXd value;
};

struct Link {
  int neighbor_target = 0;  // target holding the neighbour's held value
  int own_target = 0;       // target holding agent i's held value for this link
  double weight = 0.0;
};

using Links = std::vector<std::vector<Link>>;

// Per-agent coupling links with held values indexed in target order: agents
// (node mode) or topology.directed_edges() (edge mode).
Links build_links(const Topology& topo, TriggerMode mode) {
  Links links(topo.n_agents);
  if (mode == TriggerMode::Node) {
    for (int i = 0; i < topo.n_agents; ++i)
      for (int j : topo.neighbors[i]) links[i].push_back({j, i, topo.weight(i, j)});
    return links;
  }
  const auto edges = topo.directed_edges();
  for (int k = 0; k < static_cast<int>(edges.size()); ++k) {
    const auto [i, j] = edges[k];
    const auto rev = std::find(edges.begin(), edges.end(), DirectedEdge{j, i});
    links[i].push_back({static_cast<int>(rev - edges.begin()), k, topo.weight(i, j)});
  }
  return links;
}

// Writes dx^_i/dt into dz (estimates stacked after x) and returns per-agent
// disagreement and squared innovation.
void observer_part(const Plant& plant, const ObserverDesign& design, double gain,
                   const Links& links, const VectorXd& z, const std::vector<VectorXd>& held,
                   VectorXd& dz, std::vector<double>& disagreement,
                   std::vector<double>& innovation) {
  const int n = plant.n(), n_agents = plant.n_agents();
  const auto x = z.head(n);
  disagreement.assign(n_agents, 0.0);
  innovation.assign(n_agents, 0.0);
  for (int i = 0; i < n_agents; ++i) {
    const auto& g = design.agents[i];
    const auto xh = z.segment(n + i * n, n);
    VectorXd consensus = VectorXd::Zero(n);
    for (const auto& link : links[i]) {
      const VectorXd diff = held[link.own_target] - held[link.neighbor_target];
      consensus += link.weight * diff;
      disagreement[i] += link.weight * diff.squaredNorm();
    }
    const VectorXd out_err = plant.h[i] * (x - xh);
    innovation[i] = out_err.squaredNorm();
    dz.segment(n + i * n, n) = plant.a * xh + g.l * out_err - gain * (g.m * consensus);
  }
}

struct Evaluation {
  VectorXd f;
  VectorXd psi;
  VectorXd psi_bar;
};

class Engine {
 public:
  explicit Engine(const SimSetup& setup);
  SimResult run();

 private:
  using Held = std::vector<VectorXd>;

  void rhs(const VectorXd& z, const Held& held, VectorXd& dz, Evaluation* eval) const;
  Held held_at(double t) const;
  Held advance(const Held& base, double s);
  VectorXd rk4(const VectorXd& z0, const Held& base, double s, Held* held_end);
  VectorXd trigger_values(const VectorXd& z, const Held& held) const;
  void fire(int k, double t, const VectorXd& z, EventCause cause, double f_value);
  void record(double t, const VectorXd& z);
  void check_state(double t, const VectorXd& z) const;

  const SimSetup& setup_;
  int n_ = 0, n_agents_ = 0, n_targets_ = 0;
  std::vector<TargetInfo> targets_;
  Links links_;
  std::vector<Sample> samples_;
  std::vector<double> last_event_;
  MatrixExpCache expm_;
  double gain_ = 0.0;
  SimResult result_;
};

Engine::Engine(const SimSetup& setup) : setup_(setup), expm_(setup.plant.a) {
  const auto& topo = setup.topology;
  n_ = setup.plant.n();
  n_agents_ = topo.n_agents;
  if (setup.plant.n_agents() != n_agents_ || static_cast<int>(setup.design.agents.size()) != n_agents_)
    throw Error(ErrorCode::ConfigInvalid, "plant, topology and design disagree on agent count");
  if (static_cast<int>(setup.xhat0.size()) != n_agents_)
    throw Error(ErrorCode::ConfigInvalid, "one initial estimate per agent required");
  if (setup.plant.x0.size() != n_)
    throw Error(ErrorCode::ConfigInvalid, "initial plant state has wrong dimension");
  for (const auto& v : setup.xhat0)
    if (v.size() != n_) throw Error(ErrorCode::ConfigInvalid, "initial estimate has wrong dimension");
  const auto& opt = setup.options;
  if (!(opt.duration >= 0.0) || !(opt.step > 0.0) || opt.output_stride < 1 || !(opt.event_tol > 0.0))
    throw Error(ErrorCode::ConfigInvalid, "duration >= 0, step > 0, stride >= 1 required");

  links_ = build_links(topo, setup.mode);
  if (setup.mode == TriggerMode::Node) {
    validate(setup.node, topo);
    gain_ = setup.design.c;
    result_.bounds = miet_bounds_node(setup.design, topo, setup.node);
    for (int i = 0; i < n_agents_; ++i) {
      TargetInfo info;
      info.target = i;
      info.owner = i;
      info.weight4 = 4.0 * topo.weighted_degree(i);
      info.beta_scaled = setup.node.beta;
      info.p = setup.node.agents[i];
      targets_.push_back(info);
    }
  } else {
    validate(setup.edge, topo);
    gain_ = setup.design.c_edge;
    result_.bounds = miet_bounds_edge(setup.design, topo, setup.edge);
    const auto edges = topo.directed_edges();
    for (const auto& e : edges) {
      TargetInfo info;
      info.target = e;
      info.owner = e.first;
      info.weight4 = 4.0 * topo.weight(e.first, e.second);
      info.beta_scaled = setup.edge.beta / topo.degree_counts[e.first];
      info.p = setup.edge.edges.at(e);
      targets_.push_back(info);
    }
  }
  n_targets_ = static_cast<int>(targets_.size());
  for (int k = 0; k < n_targets_; ++k) {
    targets_[k].tau_lower = result_.bounds[k].value;
    if (!(targets_[k].p.tau_bar > 0.0)) targets_[k].p.tau_bar = default_timeout(targets_[k].tau_lower);
    result_.targets.push_back(targets_[k].target);
  }
  result_.mode = setup.mode;
  result_.state_dim = static_cast<int>(setup.plant.a.rows());
  result_.n_agents = static_cast<int>(setup.plant.h.size());
}

Engine::Held Engine::held_at(double t) const {
  Held held(n_targets_);
  for (int k = 0; k < n_targets_; ++k)
    held[k] = propagate_held(samples_[k].time, samples_[k].value, setup_.plant.a, t);
  return held;
}

Engine::Held Engine::advance(const Held& base, double s) {
  const MatrixXd& e = expm_(s);
  Held out(base.size());
  for (std::size_t k = 0; k < base.size(); ++k) out[k] = e * base[k];
  return out;
}

void Engine::rhs(const VectorXd& z, const Held& held, VectorXd& dz, Evaluation* eval) const {
  dz.resize(z.size());
  dz.head(n_) = setup_.plant.a * z.head(n_);

  std::vector<double> disagreement, innovation;
  observer_part(setup_.plant, setup_.design, gain_, links_, z, held, dz, disagreement, innovation);

  const int rho_offset = n_ + n_agents_ * n_;
  if (eval) {
    eval->f.resize(n_targets_);
    eval->psi.resize(n_targets_);
    eval->psi_bar.resize(n_targets_);
  }
  for (int k = 0; k < n_targets_; ++k) {
    const auto& info = targets_[k];
    const int i = info.owner;
    const double rho = z(rho_offset + k);
    const VectorXd xt = held[k] - z.segment(n_ + i * n_, n_);
    const double xtu_sq = (setup_.design.decomps[i].u.transpose() * xt).squaredNorm();
    const double scaled = info.beta_scaled * disagreement[i];
    // Same algebra for both mechanisms once the weights are folded in.
    dz(rho_offset + k) = -info.p.delta * rho - info.weight4 * xtu_sq + scaled +
                         info.p.gamma * innovation[i];
    if (eval) {
      eval->f(k) = info.weight4 * xtu_sq - scaled - info.p.kappa * rho;
      eval->psi(k) = xt.squaredNorm() / rho;
      eval->psi_bar(k) = info.weight4 * xtu_sq / (scaled + info.p.kappa * rho);
    }
  }
}

VectorXd Engine::trigger_values(const VectorXd& z, const Held& held) const {
  VectorXd dz;
  Evaluation eval;
  rhs(z, held, dz, &eval);
  return eval.f;
}

VectorXd Engine::rk4(const VectorXd& z0, const Held& base, double s, Held* held_end) {
  // Stage arguments of the held values follow the same recursion as x^ so that
  // x~ carries no O(s^2) stage mismatch; the node value itself is exact.
  const MatrixXd& a = setup_.plant.a;
  auto stage = [&](const Held& from, double w) {
    Held out(base.size());
    for (std::size_t k = 0; k < base.size(); ++k) out[k] = base[k] + w * (a * from[k]);
    return out;
  };
  VectorXd k1, k2, k3, k4;
  rhs(z0, base, k1, nullptr);
  const Held h2 = stage(base, 0.5 * s);
  rhs(z0 + 0.5 * s * k1, h2, k2, nullptr);
  const Held h3 = stage(h2, 0.5 * s);
  rhs(z0 + 0.5 * s * k2, h3, k3, nullptr);
  rhs(z0 + s * k3, stage(h3, s), k4, nullptr);
  if (held_end) *held_end = advance(base, s);
  return z0 + (s / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void Engine::fire(int k, double t, const VectorXd& z, EventCause cause, double f_value) {
  const int i = targets_[k].owner;
  EventRecord rec;
  rec.target = targets_[k].target;
  rec.target_index = k;
  rec.instant = t;
  rec.cause = cause;
  rec.f_at_fire = f_value;
  rec.inter_event_time = t - last_event_[k];
  result_.events.push_back(rec);
  last_event_[k] = t;
  samples_[k] = {t, z.segment(n_ + i * n_, n_)};
}

void Engine::record(double t, const VectorXd& z) {
  const Held held = held_at(t);
  VectorXd dz;
  Evaluation eval;
  rhs(z, held, dz, &eval);
  result_.time.push_back(t);
  result_.state.push_back(z.head(n_));
  std::vector<VectorXd> est(n_agents_);
  for (int i = 0; i < n_agents_; ++i) est[i] = z.segment(n_ + i * n_, n_);
  result_.estimate.push_back(std::move(est));
  result_.rho.push_back(z.tail(n_targets_));
  result_.f.push_back(eval.f);
  result_.psi.push_back(eval.psi);
  result_.psi_bar.push_back(eval.psi_bar);
}

void Engine::check_state(double t, const VectorXd& z) const {
  if (!z.allFinite()) {
    std::ostringstream msg;
    msg << "state became non-finite at t = " << t;
    throw Error(ErrorCode::NonFinite, msg.str());
  }
  const double min_rho = z.tail(n_targets_).minCoeff();
  if (!(min_rho > 0.0)) {
    std::ostringstream msg;
    msg << "rho reached " << min_rho << " at t = " << t << "; reduce the step size";
    throw Error(ErrorCode::RhoNonPositive, msg.str());
  }
}

SimResult Engine::run() {
  const auto& opt = setup_.options;
  const double h = opt.step;

  VectorXd z(n_ + n_agents_ * n_ + n_targets_);
  z.head(n_) = setup_.plant.x0;
  for (int i = 0; i < n_agents_; ++i) z.segment(n_ + i * n_, n_) = setup_.xhat0[i];
  for (int k = 0; k < n_targets_; ++k) z(n_ + n_agents_ * n_ + k) = targets_[k].p.rho0;

  // Every target is freshly sampled at t = 0.
  samples_.resize(n_targets_);
  last_event_.assign(n_targets_, 0.0);
  for (int k = 0; k < n_targets_; ++k)
    samples_[k] = {0.0, z.segment(n_ + targets_[k].owner * n_, n_)};

  result_.min_rho = z.tail(n_targets_).minCoeff();
  result_.max_f_between_events = -kInf;

  double t = 0.0;
  if (opt.duration > 0.0) record(t, z);
  long grid = 0;
  const long last_grid = static_cast<long>(std::ceil(opt.duration / h - 1e-9));

  auto deadline = [&](int k) { return samples_[k].time + targets_[k].p.tau_bar; };

  // Fires every target whose trigger is non-negative at time t, repeating
  // until none is: a neighbour's event can raise another target's f.
  auto settle = [&](double now, const VectorXd& state, const std::vector<bool>& timed_out) {
    std::vector<bool> fired(n_targets_, false);
    for (int k = 0; k < n_targets_; ++k) {
      if (!timed_out[k]) continue;
      const VectorXd f = trigger_values(state, held_at(now));
      fire(k, now, state, f(k) >= 0.0 ? EventCause::Threshold : EventCause::Timeout, f(k));
      fired[k] = true;
    }
    for (;;) {
      const VectorXd f = trigger_values(state, held_at(now));
      int next = -1;
      for (int k = 0; k < n_targets_; ++k)
        if (!fired[k] && f(k) >= -opt.crossing_tol) {
          next = k;
          break;
        }
      if (next < 0) {
        for (int k = 0; k < n_targets_; ++k)
          if (!fired[k]) result_.max_f_between_events = std::max(result_.max_f_between_events, f(k));
        return;
      }
      fire(next, now, state, EventCause::Threshold, f(next));
      fired[next] = true;
    }
  };

  while (grid < last_grid) {
    const double grid_time = std::min(static_cast<double>(grid + 1) * h, opt.duration);
    double t_end = grid_time;
    for (int k = 0; k < n_targets_; ++k) t_end = std::min(t_end, deadline(k));
    const double s = t_end - t;

    const Held base = held_at(t);
    Held held_end;
    VectorXd z_end = s > 0.0 ? rk4(z, base, s, &held_end) : z;
    if (s <= 0.0) held_end = base;
    const VectorXd f_end = trigger_values(z_end, held_end);

    if (s > 0.0 && f_end.maxCoeff() >= 0.0) {
      // Localise the earliest crossing by bisection on max_k f_k.
      double lo = 0.0, hi = s;
      while (hi - lo > opt.event_tol) {
        const double mid = 0.5 * (lo + hi);
        Held held_mid;
        const VectorXd z_mid = rk4(z, base, mid, &held_mid);
        if (trigger_values(z_mid, held_mid).maxCoeff() >= 0.0)
          hi = mid;
        else
          lo = mid;
      }
      z_end = hi == s ? z_end : rk4(z, base, hi, nullptr);
      t = hi == s ? t_end : t + hi;
      check_state(t, z_end);
      z = z_end;
      ++result_.accepted_steps;
      result_.min_rho = std::min(result_.min_rho, z.tail(n_targets_).minCoeff());
      std::vector<bool> timed_out(n_targets_);
      for (int k = 0; k < n_targets_; ++k) timed_out[k] = t >= deadline(k) - 1e-12;
      settle(t, z, timed_out);
    } else {
      t = t_end;
      z = z_end;
      check_state(t, z);
      ++result_.accepted_steps;
      result_.min_rho = std::min(result_.min_rho, z.tail(n_targets_).minCoeff());
      std::vector<bool> timed_out(n_targets_);
      bool any = false;
      for (int k = 0; k < n_targets_; ++k) {
        timed_out[k] = t >= deadline(k) - 1e-12;
        any = any || timed_out[k];
      }
      if (any)
        settle(t, z, timed_out);
      else
        result_.max_f_between_events = std::max(result_.max_f_between_events, f_end.maxCoeff());
    }

    if (t == grid_time) {
      ++grid;
      if (grid % opt.output_stride == 0 || grid == last_grid) record(t, z);
    }
  }

  // Per-target summary.
  result_.summary.resize(n_targets_);
  for (int k = 0; k < n_targets_; ++k) {
    auto& s = result_.summary[k];
    s.target = targets_[k].target;
    s.tau_lower = targets_[k].tau_lower;
    s.tau_bar = targets_[k].p.tau_bar;
    s.min_iet = kInf;
  }
  for (const auto& e : result_.events) {
    auto& s = result_.summary[e.target_index];
    ++s.count;
    (e.cause == EventCause::Threshold ? s.threshold_count : s.timeout_count) += 1;
    s.min_iet = std::min(s.min_iet, e.inter_event_time);
    s.mean_iet += e.inter_event_time;
  }
  for (auto& s : result_.summary) {
    if (s.count > 0) s.mean_iet /= s.count;
    s.bound_satisfied = s.count == 0 || s.min_iet >= s.tau_lower;
  }
  return std::move(result_);
}

}  // namespace

std::vector<VectorXd> observer_rates(TriggerMode mode, const Plant& plant,
                                     const ObserverDesign& design, const Topology& topology,
                                     const VectorXd& x, const std::vector<VectorXd>& xhat,
                                     const std::vector<VectorXd>& held) {
  const int n = plant.n(), n_agents = plant.n_agents();
  VectorXd z(n + n * n_agents), dz(z.size());
  z.head(n) = x;
  for (int i = 0; i < n_agents; ++i) z.segment(n + i * n, n) = xhat[i];
  std::vector<double> disagreement, innovation;
  const double gain = mode == TriggerMode::Node ? design.c : design.c_edge;
  observer_part(plant, design, gain, build_links(topology, mode), z, held, dz, disagreement,
                innovation);
  std::vector<VectorXd> out(n_agents);
  for (int i = 0; i < n_agents; ++i) out[i] = dz.segment(n + i * n, n);
  return out;
}

SimResult simulate(const SimSetup& setup) {
  Engine engine(setup);
  return engine.run();
}

ConvergenceFit convergence_fit(const SimResult& result) {
  ConvergenceFit fit;
  const auto errs = result.error_norms();
  if (errs.empty()) return fit;
  fit.initial_error = errs.front();
  fit.final_error = errs.back();
  const double t_end = result.time.back();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t g = 0; g < errs.size(); ++g) {
    if (result.time[g] < 0.5 * t_end || !(errs[g] > 0.0)) continue;
    const double x = result.time[g], y = std::log(errs[g]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count >= 2) fit.slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return fit;
}

}  // namespace evtobs
