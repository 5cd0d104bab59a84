#include "watermpc/hydro/plant.hpp"

#include <algorithm>
#include <cmath>

namespace watermpc::hydro {

PlantState initial_state(const NetworkTopology& topology) {
  PlantState s;
  s.tank_levels = topology.initial_levels();
  s.node_heads = Eigen::VectorXd::Zero(topology.node_count());
  s.link_flows = Eigen::VectorXd::Zero(topology.link_count());
  s.sim_time = 0.0;
  return s;
}

StepResult step(const NetworkTopology& topology, const PlantState& state,
                const Eigen::VectorXd& pump_flows,
                const Eigen::VectorXd& junction_demands, double dt,
                const StepOptions& options) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const int n_tank = topology.tank_count();
  const int n_pipe = static_cast<int>(topology.pipes.size());

  StepResult out;
  out.state = state;

  double remaining = dt;
  SteadyStateResult solve;
  while (remaining > 1e-12) {
    solve = solve_steady_state(topology, out.state.tank_levels, pump_flows,
                               junction_demands, options.solve);

    // Net inflow and level rate per tank.
    Eigen::VectorXd net = Eigen::VectorXd::Zero(n_tank);
    for (int p = 0; p < n_pipe; ++p) {
      const int a = topology.node_index(topology.pipes[p].from);
      const int b = topology.node_index(topology.pipes[p].to);
      const double q = solve.link_flows[p];
      if (topology.is_tank(b)) net[topology.tank_of_node(b)] += q;
      if (topology.is_tank(a)) net[topology.tank_of_node(a)] -= q;
    }
    for (int i = 0; i < topology.pump_count(); ++i) {
      const int node = topology.node_index(topology.pumps[i].to);
      if (topology.is_tank(node)) net[topology.tank_of_node(node)] += pump_flows[i];
    }
    Eigen::VectorXd rate(n_tank);
    for (int t = 0; t < n_tank; ++t) rate[t] = net[t] / topology.tanks[t].area;

    double sub_dt = remaining;
    const double max_rate = rate.cwiseAbs().maxCoeff();
    if (max_rate > 0.0) {
      sub_dt = std::min(sub_dt, options.max_level_change / max_rate);
    }
    // Keep a closing level gap between any two tanks from overshooting
    // equality within one explicit step.
    for (int i = 0; i < n_tank; ++i) {
      for (int j = i + 1; j < n_tank; ++j) {
        const double gap = out.state.tank_levels[i] - out.state.tank_levels[j];
        const double gap_rate = rate[i] - rate[j];
        if (gap * gap_rate < 0.0 && std::abs(gap) > 0.0) {
          sub_dt = std::min(sub_dt,
                            options.gap_safety * std::abs(gap) / std::abs(gap_rate));
        }
      }
    }
    sub_dt = std::max(sub_dt, std::min(options.min_substep, remaining));

    for (int t = 0; t < n_tank; ++t) {
      double level = out.state.tank_levels[t] + rate[t] * sub_dt;
      if (level < 0.0) {
        out.depleted = true;
        out.clamped_volume += (0.0 - level) * topology.tanks[t].area;
        level = 0.0;
      } else if (level > topology.tanks[t].max_level) {
        out.overflow = true;
        out.clamped_volume += (level - topology.tanks[t].max_level) * topology.tanks[t].area;
        level = topology.tanks[t].max_level;
      }
      out.state.tank_levels[t] = level;
    }

    out.pumped_volume += pump_flows.sum() * sub_dt;
    out.demand_volume += junction_demands.sum() * sub_dt;
    for (int p = 0; p < n_pipe; ++p) {
      const int a = topology.node_index(topology.pipes[p].from);
      const int b = topology.node_index(topology.pipes[p].to);
      const int n_fixed_start = topology.junction_count() + n_tank;
      const double q = solve.link_flows[p];
      if (a >= n_fixed_start) out.reservoir_exchange_volume += q * sub_dt;
      if (b >= n_fixed_start) out.reservoir_exchange_volume -= q * sub_dt;
    }

    out.state.sim_time += sub_dt;
    remaining -= sub_dt;
    ++out.substeps;
    if (out.substeps > 100000) {
      throw NonConvergence("tank integration stalled (too many sub-steps)",
                           solve.residual);
    }
  }

  out.state.node_heads = solve.node_heads;
  out.state.link_flows = solve.link_flows;
  return out;
}

}  // namespace watermpc::hydro
