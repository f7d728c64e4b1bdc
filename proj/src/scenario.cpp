#include "evtobs/scenario.hpp"

#include <charconv>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace evtobs {

bool SimConfig::operator==(const SimConfig& o) const {
  auto same_params = [](const TargetParams& p, const TargetParams& q) {
    return p.kappa == q.kappa && p.delta == q.delta && p.gamma == q.gamma && p.rho0 == q.rho0 &&
           p.tau_bar == q.tau_bar;
  };
  auto same_mat = [](const MatrixXd& p, const MatrixXd& q) {
    return p.rows() == q.rows() && p.cols() == q.cols() && p == q;
  };
  auto same_mats = [&](const std::vector<MatrixXd>& p, const std::vector<MatrixXd>& q) {
    if (p.size() != q.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (!same_mat(p[i], q[i])) return false;
    return true;
  };
  if (name != o.name || plant_builtin != o.plant_builtin || !same_mat(a, o.a) ||
      !same_mats(h, o.h) || !same_mat(adjacency, o.adjacency) || mode != o.mode)
    return false;
  if (node.beta != o.node.beta || node.agents.size() != o.node.agents.size()) return false;
  for (std::size_t i = 0; i < node.agents.size(); ++i)
    if (!same_params(node.agents[i], o.node.agents[i])) return false;
  if (edge.beta != o.edge.beta || edge.edges.size() != o.edge.edges.size()) return false;
  for (const auto& [e, p] : edge.edges) {
    const auto it = o.edge.edges.find(e);
    if (it == o.edge.edges.end() || !same_params(p, it->second)) return false;
  }
  if (poles != o.poles || pole_default != o.pole_default || c != o.c || c_edge != o.c_edge ||
      epsilon != o.epsilon)
    return false;
  if (duration != o.duration || step != o.step || output_stride != o.output_stride ||
      seed != o.seed || out_dir != o.out_dir)
    return false;
  if (x0.has_value() != o.x0.has_value() || (x0 && !same_mat(*x0, *o.x0))) return false;
  if (xhat0.has_value() != o.xhat0.has_value()) return false;
  if (xhat0) {
    std::vector<MatrixXd> p(xhat0->begin(), xhat0->end()), q(o.xhat0->begin(), o.xhat0->end());
    if (!same_mats(p, q)) return false;
  }
  return true;
}

MatrixXd three_inertia_a(double k_over_j) {
  const double r = k_over_j;
  MatrixXd a(6, 6);
  a << 0, 1, 0, 0, 0, 0,
       -r, 0, r, 0, 0, 0,
       0, 0, 0, 1, 0, 0,
       r, 0, -2 * r, 0, r, 0,
       0, 0, 0, 0, 0, 1,
       0, 0, r, 0, -r, 0;
  return a;
}

std::vector<MatrixXd> three_inertia_h() {
  std::vector<MatrixXd> h(4, MatrixXd::Zero(1, 6));
  h[0](0, 2) = 1;
  h[1](0, 0) = 1, h[1](0, 2) = -1;
  h[2](0, 2) = 1, h[2](0, 4) = -1;
  h[3](0, 0) = 1, h[3](0, 4) = -1;
  return h;
}

MatrixXd benchmark_adjacency() {
  return adjacency_from_edges(4, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 3, 1.0}, {2, 3, 1.0}});
}

std::vector<std::string> builtin_scenario_names() {
  return {"example1-node", "example2-edge", "example3-node"};
}

SimConfig builtin_scenario(const std::string& name) {
  SimConfig cfg;
  cfg.name = name;
  cfg.plant_builtin = "three-inertia";
  cfg.a = three_inertia_a();
  cfg.h = three_inertia_h();
  cfg.adjacency = benchmark_adjacency();
  cfg.poles.assign(4, {});
  if (name == "example1-node" || name == "example3-node") {
    const bool first = name == "example1-node";
    cfg.mode = TriggerMode::Node;
    cfg.c = 10.3;
    cfg.node.beta = 0.9;
    TargetParams p;
    p.kappa = first ? 0.03 : 30.0;
    p.delta = first ? 2.0 : 6.0;
    p.gamma = 10.0;
    p.rho0 = 1.0;
    cfg.node.agents.assign(4, p);
  } else if (name == "example2-edge") {
    cfg.mode = TriggerMode::Edge;
    cfg.c_edge = 5.3;
    cfg.epsilon = 0.01;
    cfg.edge.beta = 0.9;
    TargetParams p;
    p.kappa = 100.0;
    p.delta = 1.0;
    p.gamma = 1.0;
    p.rho0 = 1.0;
    for (const auto& e : build_topology(cfg.adjacency).directed_edges()) cfg.edge.edges[e] = p;
  } else {
    throw Error(ErrorCode::ConfigInvalid, "unknown builtin scenario '" + name + "'");
  }
  return cfg;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& field,
                         const std::string& msg) const {
    std::ostringstream out;
    out << origin_;
    if (node.IsDefined() && node.Mark().line >= 0) out << ':' << node.Mark().line + 1;
    out << ": field '" << field << "': " << msg;
    throw Error(ErrorCode::ParseError, out.str());
  }

  void allow(const YAML::Node& map, const std::string& section,
             std::initializer_list<const char*> keys) const {
    if (!map.IsMap()) fail(map, section, "expected a mapping");
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) fail(kv.first, join(section, key), "unknown key");
    }
  }

  static std::string join(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
  }

  double number(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected a number");
    try {
      return node.as<double>();
    } catch (const YAML::Exception&) {
      fail(node, field, "expected a number, got '" + node.Scalar() + "'");
    }
  }

  template <typename T>
  T integer(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected an integer");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, field, "expected an integer, got '" + node.Scalar() + "'");
    }
  }

  std::string text(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected a string");
    return node.Scalar();
  }

  VectorXd vector(const YAML::Node& node, const std::string& field) const {
    if (!node.IsSequence()) fail(node, field, "expected a list of numbers");
    VectorXd v(node.size());
    for (std::size_t i = 0; i < node.size(); ++i)
      v(i) = number(node[i], field + "[" + std::to_string(i) + "]");
    return v;
  }

  MatrixXd matrix(const YAML::Node& node, const std::string& field) const {
    if (!node.IsSequence() || node.size() == 0) fail(node, field, "expected a list of rows");
    std::vector<VectorXd> rows;
    for (std::size_t i = 0; i < node.size(); ++i)
      rows.push_back(vector(node[i], field + "[" + std::to_string(i) + "]"));
    MatrixXd m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols()) fail(node[i], field, "ragged matrix rows");
      m.row(i) = rows[i].transpose();
    }
    return m;
  }

  std::complex<double> pole(const YAML::Node& node, const std::string& field) const {
    if (node.IsScalar()) return {number(node, field), 0.0};
    if (node.IsSequence() && node.size() == 2)
      return {number(node[0], field), number(node[1], field)};
    fail(node, field, "a pole is a number or a [re, im] pair");
  }

  void target_fields(const YAML::Node& map, const std::string& section, TargetParams& p) const {
    if (map["kappa"]) p.kappa = number(map["kappa"], join(section, "kappa"));
    if (map["delta"]) p.delta = number(map["delta"], join(section, "delta"));
    if (map["gamma"]) p.gamma = number(map["gamma"], join(section, "gamma"));
    if (map["rho0"]) p.rho0 = number(map["rho0"], join(section, "rho0"));
    if (map["tau_bar"]) p.tau_bar = number(map["tau_bar"], join(section, "tau_bar"));
  }

  SimConfig parse(const YAML::Node& root) const {
    SimConfig cfg;
    allow(root, "", {"name", "plant", "topology", "mode", "trigger", "gains", "run", "initial",
                     "output"});
    if (root["name"]) cfg.name = text(root["name"], "name");

    const YAML::Node plant = root["plant"];
    if (!plant) fail(root, "plant", "missing section");
    allow(plant, "plant", {"builtin", "k_over_j", "a", "h"});
    if (plant["builtin"]) {
      cfg.plant_builtin = text(plant["builtin"], "plant.builtin");
      if (cfg.plant_builtin != "three-inertia")
        fail(plant["builtin"], "plant.builtin", "unknown builtin plant '" + cfg.plant_builtin + "'");
      const double r = plant["k_over_j"] ? number(plant["k_over_j"], "plant.k_over_j") : 1.0;
      cfg.a = three_inertia_a(r);
      cfg.h = three_inertia_h();
    }
    if (plant["a"]) cfg.a = matrix(plant["a"], "plant.a");
    if (plant["h"]) {
      const YAML::Node hs = plant["h"];
      if (!hs.IsSequence()) fail(hs, "plant.h", "expected one matrix per agent");
      cfg.h.clear();
      for (std::size_t i = 0; i < hs.size(); ++i)
        cfg.h.push_back(matrix(hs[i], "plant.h[" + std::to_string(i) + "]"));
    }
    if (cfg.a.size() == 0 || cfg.h.empty())
      fail(plant, "plant", "needs a builtin name or both 'a' and 'h'");

    const YAML::Node topo = root["topology"];
    if (!topo) fail(root, "topology", "missing section");
    allow(topo, "topology", {"adjacency", "edges"});
    if (topo["adjacency"]) {
      cfg.adjacency = matrix(topo["adjacency"], "topology.adjacency");
    } else if (topo["edges"]) {
      const YAML::Node edges = topo["edges"];
      if (!edges.IsSequence()) fail(edges, "topology.edges", "expected a list of [i, j, w]");
      std::vector<std::tuple<int, int, double>> list;
      for (std::size_t k = 0; k < edges.size(); ++k) {
        const std::string field = "topology.edges[" + std::to_string(k) + "]";
        const YAML::Node e = edges[k];
        if (!e.IsSequence() || (e.size() != 2 && e.size() != 3))
          fail(e, field, "expected [i, j] or [i, j, weight]");
        const int i = integer<int>(e[0], field), j = integer<int>(e[1], field);
        const int n = static_cast<int>(cfg.h.size());
        if (i < 1 || j < 1 || i > n || j > n) fail(e, field, "agent index out of range (1-based)");
        list.emplace_back(i - 1, j - 1, e.size() == 3 ? number(e[2], field) : 1.0);
      }
      cfg.adjacency = adjacency_from_edges(static_cast<int>(cfg.h.size()), list);
    } else {
      fail(topo, "topology", "needs 'adjacency' or 'edges'");
    }

    const std::string mode = root["mode"] ? text(root["mode"], "mode") : "node";
    if (mode == "node")
      cfg.mode = TriggerMode::Node;
    else if (mode == "edge")
      cfg.mode = TriggerMode::Edge;
    else
      fail(root["mode"], "mode", "expected 'node' or 'edge'");

    const YAML::Node trig = root["trigger"];
    if (!trig) fail(root, "trigger", "missing section");
    allow(trig, "trigger", {"beta", "kappa", "delta", "gamma", "rho0", "tau_bar", "targets"});
    const double beta = trig["beta"] ? number(trig["beta"], "trigger.beta") : 0.9;
    TargetParams broadcast;
    target_fields(trig, "trigger", broadcast);
    const int n_agents = static_cast<int>(cfg.h.size());
    if (cfg.mode == TriggerMode::Node) {
      cfg.node.beta = beta;
      cfg.node.agents.assign(n_agents, broadcast);
    } else {
      cfg.edge.beta = beta;
      for (int i = 0; i < cfg.adjacency.rows(); ++i)
        for (int j = 0; j < cfg.adjacency.cols(); ++j)
          if (i != j && cfg.adjacency(i, j) != 0.0) cfg.edge.edges[{i, j}] = broadcast;
    }
    if (const YAML::Node targets = trig["targets"]) {
      if (!targets.IsMap()) fail(targets, "trigger.targets", "expected a mapping");
      for (const auto& kv : targets) {
        const std::string key = kv.first.as<std::string>();
        const std::string field = "trigger.targets." + key;
        allow(kv.second, field, {"kappa", "delta", "gamma", "rho0", "tau_bar"});
        if (cfg.mode == TriggerMode::Node) {
          int i = 0;
          const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), i);
          if (ec != std::errc() || ptr != key.data() + key.size() || i < 1 || i > n_agents)
            fail(kv.first, field, "node targets are 1-based agent numbers");
          target_fields(kv.second, field, cfg.node.agents[i - 1]);
        } else {
          int i = 0, j = 0;
          char dash = 0;
          std::istringstream in(key);
          if (!(in >> i >> dash >> j) || dash != '-' || !in.eof())
            fail(kv.first, field, "edge targets are written 'i-j' (1-based)");
          const auto it = cfg.edge.edges.find({i - 1, j - 1});
          if (it == cfg.edge.edges.end()) fail(kv.first, field, "not an edge of the topology");
          target_fields(kv.second, field, it->second);
        }
      }
    }

    cfg.poles.assign(n_agents, {});
    if (const YAML::Node gains = root["gains"]) {
      allow(gains, "gains", {"poles", "default_pole", "c", "c_edge", "epsilon"});
      if (gains["default_pole"])
        cfg.pole_default = number(gains["default_pole"], "gains.default_pole");
      if (gains["c"]) cfg.c = number(gains["c"], "gains.c");
      if (gains["c_edge"]) cfg.c_edge = number(gains["c_edge"], "gains.c_edge");
      if (gains["epsilon"]) cfg.epsilon = number(gains["epsilon"], "gains.epsilon");
      if (const YAML::Node poles = gains["poles"]) {
        if (poles.IsScalar()) {
          cfg.pole_default = number(poles, "gains.poles");
        } else if (poles.IsSequence() && static_cast<int>(poles.size()) == n_agents) {
          for (int i = 0; i < n_agents; ++i) {
            const std::string field = "gains.poles[" + std::to_string(i) + "]";
            if (!poles[i].IsSequence()) fail(poles[i], field, "expected a list of poles");
            for (std::size_t k = 0; k < poles[i].size(); ++k)
              cfg.poles[i].push_back(pole(poles[i][k], field));
          }
        } else {
          fail(poles, "gains.poles", "expected a number or one pole list per agent");
        }
      }
    }

    if (const YAML::Node run = root["run"]) {
      allow(run, "run", {"duration", "step", "output_stride", "seed"});
      if (run["duration"]) cfg.duration = number(run["duration"], "run.duration");
      if (run["step"]) cfg.step = number(run["step"], "run.step");
      if (run["output_stride"])
        cfg.output_stride = integer<int>(run["output_stride"], "run.output_stride");
      if (run["seed"]) cfg.seed = integer<std::uint64_t>(run["seed"], "run.seed");
    }
    if (const YAML::Node init = root["initial"]) {
      allow(init, "initial", {"x0", "xhat0"});
      if (init["x0"]) cfg.x0 = vector(init["x0"], "initial.x0");
      if (init["xhat0"]) {
        const YAML::Node xs = init["xhat0"];
        if (!xs.IsSequence()) fail(xs, "initial.xhat0", "expected one vector per agent");
        std::vector<VectorXd> v;
        for (std::size_t i = 0; i < xs.size(); ++i)
          v.push_back(vector(xs[i], "initial.xhat0[" + std::to_string(i) + "]"));
        cfg.xhat0 = std::move(v);
      }
    }
    if (const YAML::Node out = root["output"]) {
      allow(out, "output", {"dir"});
      if (out["dir"]) cfg.out_dir = text(out["dir"], "output.dir");
    }
    return cfg;
  }

 private:
  std::string origin_;
};

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s == "inf") return ".inf";
  if (s == "-inf") return "-.inf";
  if (s == "nan") return ".nan";
  return s;
}

void emit_vector(YAML::Emitter& out, const VectorXd& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << num(v(i));
  out << YAML::EndSeq;
}

void emit_matrix(YAML::Emitter& out, const MatrixXd& m) {
  out << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < m.rows(); ++i) emit_vector(out, m.row(i).transpose());
  out << YAML::EndSeq;
}

void emit_target(YAML::Emitter& out, const TargetParams& p) {
  out << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "kappa" << YAML::Value << num(p.kappa);
  out << YAML::Key << "delta" << YAML::Value << num(p.delta);
  out << YAML::Key << "gamma" << YAML::Value << num(p.gamma);
  out << YAML::Key << "rho0" << YAML::Value << num(p.rho0);
  out << YAML::Key << "tau_bar" << YAML::Value << num(p.tau_bar);
  out << YAML::EndMap;
}

}  // namespace

SimConfig parse_scenario(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream out;
    out << origin << ':' << e.mark.line + 1 << ": " << e.msg;
    throw Error(ErrorCode::ParseError, out.str());
  }
  SimConfig cfg = Parser(origin).parse(root);
  validate_config(cfg);
  return cfg;
}

SimConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

SimConfig resolve_scenario(const std::string& name_or_path) {
  for (const auto& name : builtin_scenario_names())
    if (name == name_or_path) return builtin_scenario(name);
  return load_scenario(name_or_path);
}

std::string emit_scenario(const SimConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << cfg.name;

  out << YAML::Key << "plant" << YAML::Value << YAML::BeginMap;
  if (!cfg.plant_builtin.empty()) out << YAML::Key << "builtin" << YAML::Value << cfg.plant_builtin;
  out << YAML::Key << "a" << YAML::Value;
  emit_matrix(out, cfg.a);
  out << YAML::Key << "h" << YAML::Value << YAML::BeginSeq;
  for (const auto& h : cfg.h) emit_matrix(out, h);
  out << YAML::EndSeq << YAML::EndMap;

  out << YAML::Key << "topology" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "adjacency" << YAML::Value;
  emit_matrix(out, cfg.adjacency);
  out << YAML::EndMap;

  const bool node = cfg.mode == TriggerMode::Node;
  out << YAML::Key << "mode" << YAML::Value << (node ? "node" : "edge");
  out << YAML::Key << "trigger" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "beta" << YAML::Value << num(node ? cfg.node.beta : cfg.edge.beta);
  out << YAML::Key << "targets" << YAML::Value << YAML::BeginMap;
  if (node) {
    for (std::size_t i = 0; i < cfg.node.agents.size(); ++i) {
      out << YAML::Key << std::to_string(i + 1) << YAML::Value;
      emit_target(out, cfg.node.agents[i]);
    }
  } else {
    for (const auto& [e, p] : cfg.edge.edges) {
      out << YAML::Key << std::to_string(e.first + 1) + "-" + std::to_string(e.second + 1)
          << YAML::Value;
      emit_target(out, p);
    }
  }
  out << YAML::EndMap << YAML::EndMap;

  out << YAML::Key << "gains" << YAML::Value << YAML::BeginMap;
  bool explicit_poles = false;
  for (const auto& p : cfg.poles) explicit_poles = explicit_poles || !p.empty();
  if (explicit_poles) {
    out << YAML::Key << "poles" << YAML::Value << YAML::BeginSeq;
    for (const auto& set : cfg.poles) {
      out << YAML::Flow << YAML::BeginSeq;
      for (const auto& p : set) {
        if (p.imag() == 0.0)
          out << num(p.real());
        else
          out << YAML::Flow << YAML::BeginSeq << num(p.real()) << num(p.imag()) << YAML::EndSeq;
      }
      out << YAML::EndSeq;
    }
    out << YAML::EndSeq;
  }
  out << YAML::Key << "default_pole" << YAML::Value << num(cfg.pole_default);
  if (cfg.c) out << YAML::Key << "c" << YAML::Value << num(*cfg.c);
  if (cfg.c_edge) out << YAML::Key << "c_edge" << YAML::Value << num(*cfg.c_edge);
  out << YAML::Key << "epsilon" << YAML::Value << num(cfg.epsilon);
  out << YAML::EndMap;

  out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "duration" << YAML::Value << num(cfg.duration);
  out << YAML::Key << "step" << YAML::Value << num(cfg.step);
  out << YAML::Key << "output_stride" << YAML::Value << cfg.output_stride;
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;
  out << YAML::EndMap;

  if (cfg.x0 || cfg.xhat0) {
    out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
    if (cfg.x0) {
      out << YAML::Key << "x0" << YAML::Value;
      emit_vector(out, *cfg.x0);
    }
    if (cfg.xhat0) {
      out << YAML::Key << "xhat0" << YAML::Value << YAML::BeginSeq;
      for (const auto& v : *cfg.xhat0) emit_vector(out, v);
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
  }
  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dir" << YAML::Value << cfg.out_dir;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

void validate_config(const SimConfig& cfg) {
  auto invalid = [](const std::string& msg) { throw Error(ErrorCode::ValidationError, msg); };
  const Eigen::Index n = cfg.a.rows();
  if (n == 0 || cfg.a.cols() != n) invalid("plant.a must be square and non-empty");
  if (cfg.h.empty()) invalid("at least one agent is required");
  for (std::size_t i = 0; i < cfg.h.size(); ++i)
    if (cfg.h[i].cols() != n || cfg.h[i].rows() == 0)
      invalid("plant.h[" + std::to_string(i) + "] must have " + std::to_string(n) + " columns");
  if (cfg.adjacency.rows() != static_cast<Eigen::Index>(cfg.h.size()) ||
      cfg.adjacency.cols() != cfg.adjacency.rows())
    invalid("adjacency must be N x N with N the number of agents");
  const Topology topo = build_topology(cfg.adjacency);
  if (cfg.mode == TriggerMode::Node)
    validate(cfg.node, topo);
  else
    validate(cfg.edge, topo);
  if (!(cfg.duration >= 0.0)) invalid("duration must be >= 0");
  if (!(cfg.step > 0.0)) invalid("step must be positive");
  if (cfg.output_stride < 1) invalid("output_stride must be >= 1");
  if (cfg.c && !(*cfg.c > 0.0)) invalid("c must be positive");
  if (cfg.c_edge && !(*cfg.c_edge > 0.0)) invalid("c_edge must be positive");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 0.5)) invalid("epsilon must lie in (0,1/2)");
  if (!(cfg.pole_default < 0.0)) invalid("default pole must be negative");
  if (cfg.poles.size() != cfg.h.size()) invalid("one pole list per agent required");
  if (cfg.x0 && cfg.x0->size() != n) invalid("initial.x0 has the wrong dimension");
  if (cfg.xhat0) {
    if (cfg.xhat0->size() != cfg.h.size()) invalid("initial.xhat0 needs one vector per agent");
    for (const auto& v : *cfg.xhat0)
      if (v.size() != n) invalid("initial.xhat0 entry has the wrong dimension");
  }
}

void random_initial_conditions(std::uint64_t seed, int n, int n_agents, VectorXd& x0,
                               std::vector<VectorXd>& xhat0) {
  std::mt19937_64 rng(seed);
  // Explicit 53-bit mapping keeps draws identical across standard libraries.
  auto draw = [&] { return -5.0 + 10.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  x0.resize(n);
  for (int k = 0; k < n; ++k) x0(k) = draw();
  xhat0.assign(n_agents, VectorXd(n));
  for (auto& v : xhat0)
    for (int k = 0; k < n; ++k) v(k) = draw();
}

SimSetup make_setup(const SimConfig& cfg) {
  validate_config(cfg);
  SimSetup setup;
  setup.plant.a = cfg.a;
  setup.plant.h = cfg.h;
  setup.topology = build_topology(cfg.adjacency);

  DesignRequest req;
  req.c = cfg.c;
  req.c_edge = cfg.c_edge;
  req.epsilon = cfg.epsilon;
  const auto decomps = decompose_all(setup.plant, req.tol);
  for (std::size_t i = 0; i < cfg.h.size(); ++i) {
    if (!cfg.poles[i].empty())
      req.poles.push_back(cfg.poles[i]);
    else
      req.poles.emplace_back(cfg.a.rows() - decomps[i].p, std::complex<double>(cfg.pole_default));
  }
  setup.design = design_observer(setup.plant, setup.topology, req);

  setup.mode = cfg.mode;
  setup.node = cfg.node;
  setup.edge = cfg.edge;

  VectorXd x0;
  std::vector<VectorXd> xhat0;
  random_initial_conditions(cfg.seed, static_cast<int>(cfg.a.rows()),
                            static_cast<int>(cfg.h.size()), x0, xhat0);
  setup.plant.x0 = cfg.x0 ? *cfg.x0 : x0;
  setup.xhat0 = cfg.xhat0 ? *cfg.xhat0 : xhat0;

  setup.options.duration = cfg.duration;
  setup.options.step = cfg.step;
  setup.options.output_stride = cfg.output_stride;
  return setup;
}

}  // namespace evtobs
