#include "watermpc/sysid/excitation.hpp"

#include <algorithm>
#include <random>

namespace watermpc::sysid {

std::vector<ExcitationEpisode> generate_excitation(
    const hydro::NetworkTopology& topology, std::uint64_t seed, int episodes,
    int episode_length) {
  if (episodes <= 0 || episode_length <= 0) {
    throw std::invalid_argument("episodes and episode_length must be positive");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> dwell(2, 4);

  const int n_tank = topology.tank_count();
  const int m = topology.pump_count();
  const Eigen::VectorXd u_max = topology.pump_max_flows();

  std::vector<ExcitationEpisode> out;
  out.reserve(episodes);
  for (int e = 0; e < episodes; ++e) {
    ExcitationEpisode ep;
    ep.initial_levels.resize(n_tank);
    for (int t = 0; t < n_tank; ++t) {
      const double lo = topology.tanks[t].min_level + 0.1;
      const double hi = topology.tanks[t].max_level - 0.1;
      ep.initial_levels[t] = lo + (hi - lo) * unit(rng);
    }
    // Tanks joined by an inter-tank pipe start at a common level, matching
    // the near-equal operating assumption.
    TankAggregation agg = TankAggregation::build(topology);
    for (const auto& group : agg.groups()) {
      if (group.size() < 2) continue;
      double mean = 0.0;
      for (int t : group) mean += ep.initial_levels[t];
      mean /= static_cast<double>(group.size());
      for (int t : group) ep.initial_levels[t] = mean;
    }

    ep.pump_flows.resize(m, episode_length);
    for (int p = 0; p < m; ++p) {
      int k = 0;
      while (k < episode_length) {
        const double level = u_max[p] * unit(rng);  // staircase level
        const int hold = std::min(dwell(rng), episode_length - k);
        for (int i = 0; i < hold; ++i) ep.pump_flows(p, k + i) = level;
        k += hold;
      }
    }
    ep.demand_scale = 0.7 + 0.6 * unit(rng);
    out.push_back(std::move(ep));
  }
  return out;
}

Dataset collect_dataset(const hydro::NetworkTopology& topology,
                        const TankAggregation& aggregation,
                        const std::vector<ExcitationEpisode>& episodes,
                        const Eigen::MatrixXd& base_demands,
                        const CollectOptions& options, CollectStats* stats) {
  if (base_demands.cols() != topology.junction_count()) {
    throw std::invalid_argument("base demand profile must have one column per junction");
  }
  const int profile_len = static_cast<int>(base_demands.rows());
  if (profile_len == 0) throw std::invalid_argument("base demand profile empty");

  Dataset ds;
  ds.dt = options.dt;
  ds.n = aggregation.state_count();
  ds.m = topology.pump_count();

  int dropped = 0;
  for (const auto& ep : episodes) {
    std::vector<DatasetRecord> episode_records;
    try {
      hydro::PlantState state = initial_state(topology);
      state.tank_levels = ep.initial_levels;
      const int len = static_cast<int>(ep.pump_flows.cols());
      for (int k = 0; k < len; ++k) {
        const Eigen::VectorXd demands =
            ep.demand_scale * base_demands.row(k % profile_len).transpose();
        const Eigen::VectorXd u = ep.pump_flows.col(k);

        DatasetRecord rec;
        rec.h = aggregation.to_model(state.tank_levels);
        rec.u = u;
        rec.d_a = 0.0;
        for (int j = 0; j < topology.junction_count(); ++j) {
          if (topology.junctions[j].controlled_zone) rec.d_a += demands[j];
        }
        // Outlet pressures from the solve at the pre-step levels.
        const auto solve = hydro::solve_steady_state(
            topology, state.tank_levels, u, demands, options.step.solve);
        rec.p_out = hydro::pump_outlet_pressures(topology, solve.node_heads);

        const auto stepped =
            hydro::step(topology, state, u, demands, options.dt, options.step);
        state = stepped.state;
        rec.h_next = aggregation.to_model(state.tank_levels);
        episode_records.push_back(std::move(rec));
      }
    } catch (const hydro::NonConvergence&) {
      ++dropped;
      continue;
    }
    ds.episode_offsets.push_back(ds.size());
    for (auto& r : episode_records) ds.records.push_back(std::move(r));
  }

  if (stats) {
    stats->episodes_run = static_cast<int>(episodes.size());
    stats->episodes_dropped = dropped;
  }
  const double frac =
      episodes.empty() ? 0.0 : static_cast<double>(dropped) / episodes.size();
  if (frac > options.max_dropped_fraction) {
    throw std::runtime_error("excitation dropped " + std::to_string(dropped) +
                             " of " + std::to_string(episodes.size()) +
                             " episodes on solver failures");
  }
  return ds;
}

}  // namespace watermpc::sysid
