#include "watermpc/sim/scenario.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace watermpc::sim {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

Eigen::VectorXd read_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open profile file: " + path);
  std::vector<double> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      values.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw ScenarioError(path + ":" + std::to_string(lineno) +
                          ": expected one numeric value per line");
    }
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<int>(values.size()));
}

// Profile entries are either an inline array or {"csv": "path"}.
Eigen::VectorXd read_profile(const json& node, const fs::path& base,
                             const std::string& what) {
  if (node.is_array()) {
    Eigen::VectorXd v(static_cast<int>(node.size()));
    for (int i = 0; i < v.size(); ++i) v[i] = node[i].get<double>();
    return v;
  }
  if (node.is_object() && node.contains("csv")) {
    return read_profile_csv((base / node["csv"].get<std::string>()).string());
  }
  throw ScenarioError(what + ": expected an array or {\"csv\": path}");
}

}  // namespace

void ScenarioConfig::validate(const hydro::NetworkTopology& topology) const {
  const int T = steps_per_day();
  if (T <= 0) throw ScenarioError("price profile is empty");
  if (demand_profiles.rows() != T) {
    throw ScenarioError("demand profiles must have one row per price step");
  }
  if (demand_profiles.cols() != topology.junction_count()) {
    throw ScenarioError("demand profiles must cover every junction");
  }
  if (demand_profiles.minCoeff() < 0) throw ScenarioError("demands must be non-negative");
  if (perturb_amplitude < 0.0 || perturb_amplitude > 0.5) {
    throw ScenarioError("perturbation amplitude outside [0, 0.5]");
  }
  if (days <= 0) throw ScenarioError("days must be positive");
  if (initial_levels) {
    if (initial_levels->size() != topology.tank_count()) {
      throw ScenarioError("initial_levels must name every tank");
    }
    for (int t = 0; t < topology.tank_count(); ++t) {
      if ((*initial_levels)[t] < topology.tanks[t].min_level ||
          (*initial_levels)[t] > topology.tanks[t].max_level) {
        throw ScenarioError("initial level of tank " + topology.tanks[t].id +
                            " outside its bounds");
      }
    }
  }
  const double expected_T = mpc.t_day / mpc.dt;
  if (std::abs(expected_T - T) > 1e-9) {
    throw ScenarioError("profile length does not match t_day/dt");
  }
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  json doc;
  try {
    doc = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ScenarioError(path + ": " + e.what());
  }
  const fs::path base = fs::path(path).parent_path();

  ScenarioConfig sc;
  if (!doc.contains("topology")) throw ScenarioError(path + ": missing 'topology'");
  sc.topology_path = (base / doc["topology"].get<std::string>()).string();
  sc.price = read_profile(doc.at("price"), base, path + ": price");

  const hydro::NetworkTopology topology = hydro::NetworkTopology::load(sc.topology_path);
  const int T = static_cast<int>(sc.price.size());
  sc.demand_profiles = Eigen::MatrixXd::Zero(T, topology.junction_count());
  if (!doc.contains("demands") || !doc["demands"].is_object()) {
    throw ScenarioError(path + ": missing 'demands' object");
  }
  for (const auto& [id, node] : doc["demands"].items()) {
    const int node_idx = topology.node_index(id);
    if (!topology.is_junction(node_idx)) {
      throw ScenarioError(path + ": demand profile for non-junction '" + id + "'");
    }
    const Eigen::VectorXd profile = read_profile(node, base, path + ": demand " + id);
    if (profile.size() != T) {
      throw ScenarioError(path + ": demand profile for '" + id + "' must have " +
                          std::to_string(T) + " entries");
    }
    sc.demand_profiles.col(node_idx) = profile;
  }

  if (doc.contains("perturbation")) {
    const auto& p = doc["perturbation"];
    sc.perturb_seed = p.value("seed", sc.perturb_seed);
    sc.perturb_amplitude = p.value("amplitude", sc.perturb_amplitude);
  }
  sc.days = doc.value("days", 1);
  sc.output_dir = doc.value("output_dir", std::string("out"));

  if (doc.contains("initial_levels")) {
    const auto& node = doc["initial_levels"];
    if (node.is_string() && node.get<std::string>() == "periodic") {
      sc.initial_levels.reset();
    } else if (node.is_object()) {
      Eigen::VectorXd levels(topology.tank_count());
      for (int t = 0; t < topology.tank_count(); ++t) {
        const auto& id = topology.tanks[t].id;
        if (!node.contains(id)) {
          throw ScenarioError(path + ": initial_levels missing tank '" + id + "'");
        }
        levels[t] = node[id].get<double>();
      }
      sc.initial_levels = levels;
    } else {
      throw ScenarioError(path + ": initial_levels must be \"periodic\" or a map");
    }
  }

  if (doc.contains("mpc")) {
    const auto& mj = doc["mpc"];
    sc.mpc.terminal_radius = mj.value("terminal_radius", sc.mpc.terminal_radius);
    sc.mpc.barrier_a = mj.value("barrier_a", sc.mpc.barrier_a);
    sc.mpc.barrier_b = mj.value("barrier_b", sc.mpc.barrier_b);
    sc.mpc.dt = mj.value("dt", sc.mpc.dt);
    sc.mpc.t_day = mj.value("t_day", sc.mpc.t_day);
    auto read_bounds = [&](const char* key) -> std::optional<Eigen::VectorXd> {
      if (!mj.contains(key)) return std::nullopt;
      const auto arr = mj[key].get<std::vector<double>>();
      return Eigen::Map<const Eigen::VectorXd>(arr.data(), static_cast<int>(arr.size()));
    };
    sc.mpc.state_lower = read_bounds("state_lower");
    sc.mpc.state_upper = read_bounds("state_upper");
    if (mj.contains("solver")) {
      const auto& sj = mj["solver"];
      sc.mpc.solver.max_outer = sj.value("outer_max", sc.mpc.solver.max_outer);
      sc.mpc.solver.max_inner = sj.value("inner_max", sc.mpc.solver.max_inner);
      sc.mpc.solver.tol_constraint = sj.value("tol_constraint", sc.mpc.solver.tol_constraint);
      sc.mpc.solver.tol_gradient = sj.value("tol_gradient", sc.mpc.solver.tol_gradient);
    }
  }
  if (doc.contains("sysid")) {
    const auto& sj = doc["sysid"];
    sc.sysid.seed = sj.value("seed", sc.sysid.seed);
    sc.sysid.episodes = sj.value("episodes", sc.sysid.episodes);
    sc.sysid.episode_length = sj.value("episode_length", sc.sysid.episode_length);
    sc.sysid.ridge = sj.value("ridge", sc.sysid.ridge);
    sc.sysid.holdout_fraction = sj.value("holdout", sc.sysid.holdout_fraction);
  }

  sc.validate(topology);
  return sc;
}

mpc::MpcConfig build_mpc_config(const MpcOptions& options,
                                const sysid::TankAggregation& aggregation,
                                const hydro::NetworkTopology& topology) {
  mpc::MpcConfig cfg;
  cfg.state_lower = options.state_lower ? *options.state_lower
                                        : aggregation.state_lower(topology);
  cfg.state_upper = options.state_upper ? *options.state_upper
                                        : aggregation.state_upper(topology);
  cfg.input_upper = topology.pump_max_flows();
  cfg.terminal_radius = options.terminal_radius;
  cfg.dt = options.dt;
  cfg.t_day = options.t_day;
  cfg.solver = options.solver;
  cfg.barrier_a = Eigen::VectorXd::Constant(2 * cfg.n(), options.barrier_a);
  cfg.barrier_b = Eigen::VectorXd::Constant(2 * cfg.n(), options.barrier_b);
  cfg.validate();
  return cfg;
}

}  // namespace watermpc::sim
