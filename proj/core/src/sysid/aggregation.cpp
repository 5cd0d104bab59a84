#include "watermpc/sysid/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace watermpc::sysid {

TankAggregation TankAggregation::build(const hydro::NetworkTopology& topology) {
  const int n_tank = topology.tank_count();
  // Union-find over tanks joined by inter-tank pipes.
  std::vector<int> parent(n_tank);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& pipe : topology.pipes) {
    if (!pipe.inter_tank) continue;
    const int a = topology.tank_of_node(topology.node_index(pipe.from));
    const int b = topology.tank_of_node(topology.node_index(pipe.to));
    parent[find(a)] = find(b);
  }

  TankAggregation agg;
  agg.tank_count_ = n_tank;
  agg.tank_areas_.resize(n_tank);
  for (int t = 0; t < n_tank; ++t) agg.tank_areas_[t] = topology.tanks[t].area;

  std::vector<int> root_to_state(n_tank, -1);
  for (int t = 0; t < n_tank; ++t) {
    const int r = find(t);
    if (root_to_state[r] < 0) {
      root_to_state[r] = static_cast<int>(agg.groups_.size());
      agg.groups_.emplace_back();
    }
    agg.groups_[root_to_state[r]].push_back(t);
  }
  agg.areas_.resize(agg.state_count());
  for (int s = 0; s < agg.state_count(); ++s) {
    double area = 0.0;
    for (int t : agg.groups_[s]) area += agg.tank_areas_[t];
    agg.areas_[s] = area;
  }
  return agg;
}

std::vector<std::vector<std::string>> TankAggregation::group_ids(
    const hydro::NetworkTopology& topology) const {
  std::vector<std::vector<std::string>> ids;
  for (const auto& group : groups_) {
    std::vector<std::string> names;
    for (int t : group) names.push_back(topology.tanks[t].id);
    ids.push_back(std::move(names));
  }
  return ids;
}

Eigen::VectorXd TankAggregation::to_model(const Eigen::VectorXd& tank_levels,
                                          double max_spread) const {
  if (tank_levels.size() != tank_count_) {
    throw AggregationError("tank level vector size mismatch");
  }
  Eigen::VectorXd state(state_count());
  for (int s = 0; s < state_count(); ++s) {
    double weighted = 0.0;
    double lo = tank_levels[groups_[s].front()], hi = lo;
    for (int t : groups_[s]) {
      weighted += tank_levels[t] * tank_areas_[t];
      lo = std::min(lo, tank_levels[t]);
      hi = std::max(hi, tank_levels[t]);
    }
    if (hi - lo > max_spread) {
      throw AggregationError("tank group levels spread " + std::to_string(hi - lo) +
                             " m exceeds " + std::to_string(max_spread) + " m");
    }
    state[s] = weighted / areas_[s];
  }
  return state;
}

Eigen::VectorXd TankAggregation::to_physical(const Eigen::VectorXd& state) const {
  if (state.size() != state_count()) {
    throw AggregationError("model state vector size mismatch");
  }
  Eigen::VectorXd levels(tank_count_);
  for (int s = 0; s < state_count(); ++s) {
    for (int t : groups_[s]) levels[t] = state[s];
  }
  return levels;
}

Eigen::VectorXd TankAggregation::state_lower(
    const hydro::NetworkTopology& topology) const {
  Eigen::VectorXd lo(state_count());
  for (int s = 0; s < state_count(); ++s) {
    double v = topology.tanks[groups_[s].front()].min_level;
    for (int t : groups_[s]) v = std::max(v, topology.tanks[t].min_level);
    lo[s] = v;
  }
  return lo;
}

Eigen::VectorXd TankAggregation::state_upper(
    const hydro::NetworkTopology& topology) const {
  Eigen::VectorXd hi(state_count());
  for (int s = 0; s < state_count(); ++s) {
    double v = topology.tanks[groups_[s].front()].max_level;
    for (int t : groups_[s]) v = std::min(v, topology.tanks[t].max_level);
    hi[s] = v;
  }
  return hi;
}

}  // namespace watermpc::sysid
