#include "watermpc/hydro/network.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

namespace watermpc::hydro {

using nlohmann::json;

void NetworkTopology::build_index() const {
  if (!index_cache_.empty()) return;
  int idx = 0;
  for (const auto& j : junctions) index_cache_[j.id] = idx++;
  for (const auto& t : tanks) index_cache_[t.id] = idx++;
  for (const auto& r : reservoirs) index_cache_[r.id] = idx++;
}

int NetworkTopology::node_index(const std::string& id) const {
  build_index();
  auto it = index_cache_.find(id);
  if (it == index_cache_.end()) {
    throw TopologyError("unknown node id '" + id + "'");
  }
  return it->second;
}

double NetworkTopology::fixed_head(int node,
                                   const Eigen::VectorXd& tank_levels) const {
  if (is_tank(node)) {
    const int t = tank_of_node(node);
    return tanks[t].elevation + tank_levels[t];
  }
  const int r = node - junction_count() - tank_count();
  return reservoirs[r].head;
}

Eigen::VectorXd NetworkTopology::pump_max_flows() const {
  Eigen::VectorXd u(pump_count());
  for (int i = 0; i < pump_count(); ++i) u[i] = pumps[i].max_flow;
  return u;
}

Eigen::VectorXd NetworkTopology::initial_levels() const {
  Eigen::VectorXd h(tank_count());
  for (int i = 0; i < tank_count(); ++i) h[i] = tanks[i].init_level;
  return h;
}

void NetworkTopology::validate() const {
  if (tanks.empty()) throw TopologyError("network needs at least one tank");
  if (pumps.empty()) throw TopologyError("network needs at least one pump");

  index_cache_.clear();
  build_index();
  if (index_cache_.size() !=
      junctions.size() + tanks.size() + reservoirs.size()) {
    throw TopologyError("duplicate node ids");
  }

  for (const auto& t : tanks) {
    if (!(t.area > 0)) throw TopologyError("tank " + t.id + ": area must be positive");
    if (!(t.min_level < t.max_level)) throw TopologyError("tank " + t.id + ": min_level must be below max_level");
    if (t.init_level < 0 || t.init_level > t.max_level) throw TopologyError("tank " + t.id + ": init_level outside [0, max_level]");
  }
  for (const auto& p : pipes) {
    if (!(p.resistance > 0)) throw TopologyError("pipe " + p.from + "-" + p.to + ": resistance must be positive");
    const int a = node_index(p.from);
    const int b = node_index(p.to);
    if (a == b) throw TopologyError("pipe " + p.from + "-" + p.to + ": self loop");
    const bool both_tanks = is_tank(a) && is_tank(b);
    if (p.inter_tank && !both_tanks) {
      throw TopologyError("pipe " + p.from + "-" + p.to + ": inter_tank flag requires tank endpoints");
    }
  }
  const int n_junc = junction_count();
  const int n_tank = tank_count();
  for (const auto& p : pumps) {
    const int src = node_index(p.from);
    if (src < n_junc + n_tank) {
      throw TopologyError("pump " + p.id + ": source must be a reservoir");
    }
    node_index(p.to);
    if (!(p.max_flow > 0)) throw TopologyError("pump " + p.id + ": max_flow must be positive");
  }

  // Connectivity over pipes and pumps, undirected.
  const int n = node_count();
  std::vector<std::vector<int>> adj(n);
  for (const auto& p : pipes) {
    const int a = node_index(p.from), b = node_index(p.to);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (const auto& p : pumps) {
    const int a = node_index(p.from), b = node_index(p.to);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> seen(n, 0);
  std::queue<int> bfs;
  bfs.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!bfs.empty()) {
    const int v = bfs.front();
    bfs.pop();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        bfs.push(w);
      }
    }
  }
  if (reached != n) throw TopologyError("network graph is not connected");
}

namespace {

double require_number(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw TopologyError(ctx + ": missing numeric field '" + key + "'");
  }
  return obj[key].get<double>();
}

std::string require_string(const json& obj, const char* key,
                           const std::string& ctx) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    throw TopologyError(ctx + ": missing string field '" + key + "'");
  }
  return obj[key].get<std::string>();
}

}  // namespace

NetworkTopology NetworkTopology::from_json_text(const std::string& text,
                                                const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw TopologyError(origin + ": " + e.what());
  }

  NetworkTopology net;
  for (const auto& j : doc.value("junctions", json::array())) {
    Junction junc;
    junc.id = require_string(j, "id", origin + " junction");
    junc.elevation = j.value("elevation", 0.0);
    junc.demand = j.value("demand", false);
    junc.controlled_zone = j.value("controlled_zone", junc.demand);
    net.junctions.push_back(junc);
  }
  for (const auto& t : doc.value("tanks", json::array())) {
    Tank tank;
    tank.id = require_string(t, "id", origin + " tank");
    tank.area = require_number(t, "area", origin + " tank " + tank.id);
    tank.min_level = require_number(t, "min_level", origin + " tank " + tank.id);
    tank.max_level = require_number(t, "max_level", origin + " tank " + tank.id);
    tank.init_level = require_number(t, "init_level", origin + " tank " + tank.id);
    tank.elevation = t.value("elevation", 0.0);
    net.tanks.push_back(tank);
  }
  for (const auto& r : doc.value("reservoirs", json::array())) {
    Reservoir res;
    res.id = require_string(r, "id", origin + " reservoir");
    res.head = require_number(r, "head", origin + " reservoir " + res.id);
    net.reservoirs.push_back(res);
  }
  for (const auto& p : doc.value("pipes", json::array())) {
    Pipe pipe;
    pipe.from = require_string(p, "from", origin + " pipe");
    pipe.to = require_string(p, "to", origin + " pipe");
    pipe.resistance = require_number(p, "K", origin + " pipe " + pipe.from + "-" + pipe.to);
    pipe.inter_tank = p.value("inter_tank", false);
    net.pipes.push_back(pipe);
  }
  for (const auto& p : doc.value("pumps", json::array())) {
    Pump pump;
    pump.id = require_string(p, "id", origin + " pump");
    pump.from = require_string(p, "from", origin + " pump " + pump.id);
    pump.to = require_string(p, "to", origin + " pump " + pump.id);
    pump.max_flow = require_number(p, "max_flow", origin + " pump " + pump.id);
    net.pumps.push_back(pump);
  }
  net.validate();
  return net;
}

NetworkTopology NetworkTopology::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TopologyError("cannot open topology file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str(), path);
}

}  // namespace watermpc::hydro
