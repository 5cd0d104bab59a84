#include "watermpc/sim/follower.hpp"

#include <cmath>

#include "watermpc/sim/profiles.hpp"

namespace watermpc::sim {

namespace {

struct FollowerRun {
  RunLog log;
  Eigen::VectorXd end_state;  // aggregated
};

// Simulates the follower with the given uniform total-flow offset: per step
// the commanded total is d_a(k) + offset, split across pumps proportionally
// to capacity, clamped per pump.
FollowerRun simulate(const ScenarioConfig& scenario, SimulationSetup& setup,
                     const Eigen::VectorXd& realized_da, double offset) {
  const hydro::NetworkTopology& net = setup.topology;
  const int T = setup.mpc_config.steps_per_day();
  const int steps = scenario.days * T;
  const Eigen::VectorXd u_max = net.pump_max_flows();
  const Eigen::VectorXd share = u_max / u_max.sum();
  const Eigen::VectorXd p_in = setup.pressure.p_in;

  FollowerRun run;
  hydro::PlantState plant = hydro::initial_state(net);
  if (scenario.initial_levels) {
    plant.tank_levels = *scenario.initial_levels;
  } else {
    plant.tank_levels =
        setup.aggregation.to_physical(setup.periodic.h_star.col(0));
  }
  for (int t = 0; t < net.tank_count(); ++t) {
    run.log.initial_volume += plant.tank_levels[t] * net.tanks[t].area;
  }

  for (int k = 0; k < steps; ++k) {
    RunRecord rec;
    rec.t = k * setup.mpc_config.dt;
    rec.price = scenario.price[k % T];
    rec.d_real = realized_da[k];
    rec.d_forecast = realized_da[k];  // the follower reacts to realized demand
    rec.state = setup.aggregation.to_model(plant.tank_levels);

    const double total = realized_da[k] + offset;
    rec.u = (share * total).cwiseMax(0.0).cwiseMin(u_max);

    const Eigen::VectorXd junction_demands =
        scenario.demand_profiles.row(k % T).transpose();
    const auto pre_solve =
        hydro::solve_steady_state(net, plant.tank_levels, rec.u, junction_demands);
    const Eigen::VectorXd p_out =
        hydro::pump_outlet_pressures(net, pre_solve.node_heads);
    rec.step_cost = rec.price * setup.mpc_config.dt * rec.u.dot(p_out - p_in);

    const auto stepped =
        hydro::step(net, plant, rec.u, junction_demands, setup.mpc_config.dt);
    plant = stepped.state;
    run.log.pumped_volume += stepped.pumped_volume;
    run.log.demand_volume += stepped.demand_volume;
    run.log.exchange_volume += stepped.reservoir_exchange_volume;
    run.log.clamped_volume += stepped.clamped_volume;

    rec.tank_levels = plant.tank_levels;
    rec.violation = false;
    for (int i = 0; i < net.tank_count(); ++i) {
      if (plant.tank_levels[i] < net.tanks[i].min_level - 1e-9 ||
          plant.tank_levels[i] > net.tanks[i].max_level + 1e-9) {
        rec.violation = true;
      }
    }
    if (rec.violation) ++run.log.violation_count;
    run.log.total_cost += rec.step_cost;
    rec.cost_cum = run.log.total_cost;
    run.log.records.push_back(std::move(rec));
  }
  for (int t = 0; t < net.tank_count(); ++t) {
    run.log.final_volume += plant.tank_levels[t] * net.tanks[t].area;
  }
  run.end_state = setup.aggregation.to_model(plant.tank_levels, 1e9);
  return run;
}

}  // namespace

RunLog demand_follower(const ScenarioConfig& scenario, SimulationSetup& setup) {
  if (setup.periodic.steps() != setup.mpc_config.steps_per_day()) {
    throw std::logic_error("periodic trajectory missing; call compute_periodic first");
  }
  const DemandRealization demand = synth_demand(
      setup.base_da, scenario.perturb_seed, scenario.perturb_amplitude,
      scenario.days);
  const int T = setup.mpc_config.steps_per_day();
  const Eigen::VectorXd target = setup.periodic.h_star.col(T);
  const Eigen::VectorXd areas = setup.aggregation.group_areas();
  const double radius = setup.mpc_config.terminal_radius;

  // Signed stored-volume mismatch at the end of the run; monotone increasing
  // in the offset, so a plain bisection brackets the root.
  auto volume_error = [&](double offset) {
    const FollowerRun run = simulate(scenario, setup, demand.realized, offset);
    return (run.end_state - target).dot(areas);
  };

  const double u_cap = setup.topology.pump_max_flows().sum();
  double lo = -u_cap, hi = u_cap;
  double f_lo = volume_error(lo), f_hi = volume_error(hi);
  if (f_lo > 0.0 || f_hi < 0.0) {
    throw BenchmarkInfeasible(
        "follower cannot reach the terminal volume within pump bounds");
  }
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = volume_error(mid);
    if (f_mid >= 0.0) {
      hi = mid;
      f_hi = f_mid;
    } else {
      lo = mid;
      f_lo = f_mid;
    }
  }

  FollowerRun final_run = simulate(scenario, setup, demand.realized, 0.5 * (lo + hi));
  const double distance = (final_run.end_state - target).norm();
  if (distance > radius) {
    throw BenchmarkInfeasible(
        "follower end state misses the terminal ball by " +
        std::to_string(distance - radius) + " m");
  }
  return std::move(final_run.log);
}

}  // namespace watermpc::sim
