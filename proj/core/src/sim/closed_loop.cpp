#include "watermpc/sim/closed_loop.hpp"

#include <cmath>

#include "watermpc/sim/profiles.hpp"

namespace watermpc::sim {

namespace {

Eigen::VectorXd aggregated_profile(const ScenarioConfig& scenario,
                                   const hydro::NetworkTopology& topology) {
  const int T = scenario.steps_per_day();
  Eigen::VectorXd da = Eigen::VectorXd::Zero(T);
  for (int k = 0; k < T; ++k) {
    for (int j = 0; j < topology.junction_count(); ++j) {
      if (topology.junctions[j].controlled_zone) {
        da[k] += scenario.demand_profiles(k, j);
      }
    }
  }
  return da;
}

}  // namespace

SimulationSetup identify(const ScenarioConfig& scenario,
                         sysid::Dataset* dataset_out) {
  SimulationSetup setup;
  setup.topology = hydro::NetworkTopology::load(scenario.topology_path);
  scenario.validate(setup.topology);
  setup.aggregation = sysid::aggregate_tanks(setup.topology);
  setup.mpc_config =
      build_mpc_config(scenario.mpc, setup.aggregation, setup.topology);
  setup.base_da = aggregated_profile(scenario, setup.topology);

  const auto episodes = sysid::generate_excitation(
      setup.topology, scenario.sysid.seed, scenario.sysid.episodes,
      scenario.sysid.episode_length);
  sysid::CollectOptions collect_options;
  collect_options.dt = scenario.mpc.dt;
  sysid::Dataset dataset =
      sysid::collect_dataset(setup.topology, setup.aggregation, episodes,
                             scenario.demand_profiles, collect_options);

  auto [train, holdout] = dataset.split_holdout(scenario.sysid.holdout_fraction);
  sysid::FitOptions fit_options;
  fit_options.ridge = scenario.sysid.ridge;
  setup.model = sysid::fit_state_model(train, fit_options);
  setup.pressure = sysid::fit_pressure_model(train, setup.topology, fit_options);
  if (holdout.size() > 0) {
    setup.state_rms_holdout = sysid::state_prediction_rms(setup.model, holdout);
    setup.pressure_rms_holdout =
        sysid::pressure_prediction_rms(setup.pressure, holdout);
  } else {
    setup.state_rms_holdout = Eigen::VectorXd::Zero(setup.model.n);
    setup.pressure_rms_holdout = Eigen::VectorXd::Zero(setup.model.m);
  }
  if (dataset_out) *dataset_out = std::move(dataset);
  return setup;
}

SimulationSetup setup_from_artifacts(const ScenarioConfig& scenario,
                                     const sysid::LinearDiscreteModel& model,
                                     const sysid::PressureModel& pressure,
                                     std::optional<mpc::PeriodicTrajectory> periodic) {
  SimulationSetup setup;
  setup.topology = hydro::NetworkTopology::load(scenario.topology_path);
  scenario.validate(setup.topology);
  setup.aggregation = sysid::aggregate_tanks(setup.topology);
  setup.mpc_config =
      build_mpc_config(scenario.mpc, setup.aggregation, setup.topology);
  setup.base_da = aggregated_profile(scenario, setup.topology);
  setup.model = model;
  setup.pressure = pressure;
  setup.state_rms_holdout = Eigen::VectorXd::Zero(model.n);
  setup.pressure_rms_holdout = Eigen::VectorXd::Zero(model.m);
  if (periodic) setup.periodic = std::move(*periodic);
  return setup;
}

void compute_periodic(const ScenarioConfig& scenario, SimulationSetup* setup) {
  setup->periodic = mpc::compute_periodic_trajectory(
      setup->model, setup->pressure, setup->base_da, scenario.price,
      setup->mpc_config);
}

RunLog run_closed_loop(const ScenarioConfig& scenario, SimulationSetup& setup,
                       PlantKind plant_kind) {
  const int T = setup.mpc_config.steps_per_day();
  const int steps = scenario.days * T;
  const hydro::NetworkTopology& net = setup.topology;

  if (setup.periodic.steps() != T) {
    throw std::logic_error("periodic trajectory missing; call compute_periodic first");
  }

  const DemandRealization demand = synth_demand(
      setup.base_da, scenario.perturb_seed, scenario.perturb_amplitude,
      scenario.days);

  mpc::Controller controller(setup.model, setup.pressure, setup.periodic,
                             setup.mpc_config);

  // Scale factors from aggregate demand to per-junction demands, per hour of
  // day, so the plant sees the scenario's spatial split.
  const Eigen::VectorXd u_zero = Eigen::VectorXd::Zero(net.pump_count());

  RunLog log;
  hydro::PlantState plant = hydro::initial_state(net);
  if (scenario.initial_levels) {
    plant.tank_levels = *scenario.initial_levels;
  } else {
    plant.tank_levels =
        setup.aggregation.to_physical(setup.periodic.h_star.col(0));
  }

  Eigen::VectorXd model_state;  // linear stand-in plant state
  if (plant_kind == PlantKind::linear) {
    model_state = scenario.initial_levels
                      ? setup.aggregation.to_model(*scenario.initial_levels)
                      : setup.periodic.h_star.col(0);
  }

  for (int t = 0; t < net.tank_count(); ++t) {
    log.initial_volume += plant.tank_levels[t] * net.tanks[t].area;
  }
  if (plant_kind == PlantKind::linear) {
    log.initial_volume = model_state.dot(setup.aggregation.group_areas());
  }

  const Eigen::VectorXd p_in = setup.pressure.p_in;

  for (int k = 0; k < steps; ++k) {
    const double t = k * setup.mpc_config.dt;
    const int N = mpc::horizon_length(t, setup.mpc_config.t_day, setup.mpc_config.dt);

    RunRecord rec;
    rec.t = t;
    rec.price = scenario.price[k % T];
    rec.d_real = demand.realized[k];
    rec.d_forecast = demand.forecast[k];

    // Measure.
    if (plant_kind == PlantKind::hydraulic) {
      rec.state = setup.aggregation.to_model(plant.tank_levels);
    } else {
      rec.state = model_state;
    }

    // Forecast slices to the next midnight.
    const Eigen::VectorXd d_fc = demand.forecast.segment(k, N);
    Eigen::VectorXd c_fc(N);
    for (int j = 0; j < N; ++j) c_fc[j] = scenario.price[(k + j) % T];

    const auto ctrl = controller.step(rec.state, t, d_fc, c_fc);
    rec.u = ctrl.u;
    rec.feasible = ctrl.solve_status == mpc::MpcStatus::optimal;
    rec.fallback = ctrl.source == mpc::InputSource::mpc
                       ? 0
                       : (ctrl.source == mpc::InputSource::cached ? 1 : 2);

    // Apply to the plant for one sampling interval.
    if (plant_kind == PlantKind::hydraulic) {
      const Eigen::VectorXd junction_demands =
          scenario.demand_profiles.row(k % T).transpose();
      // Plant-side electricity from the solve at the pre-step levels.
      const auto pre_solve = hydro::solve_steady_state(
          net, plant.tank_levels, rec.u, junction_demands);
      const Eigen::VectorXd p_out =
          hydro::pump_outlet_pressures(net, pre_solve.node_heads);
      rec.step_cost =
          rec.price * setup.mpc_config.dt * rec.u.dot(p_out - p_in);

      const auto stepped = hydro::step(net, plant, rec.u, junction_demands,
                                       setup.mpc_config.dt);
      plant = stepped.state;
      log.pumped_volume += stepped.pumped_volume;
      log.demand_volume += stepped.demand_volume;
      log.exchange_volume += stepped.reservoir_exchange_volume;
      log.clamped_volume += stepped.clamped_volume;
      rec.tank_levels = plant.tank_levels;

      rec.violation = false;
      for (int i = 0; i < net.tank_count(); ++i) {
        if (plant.tank_levels[i] < net.tanks[i].min_level - 1e-9 ||
            plant.tank_levels[i] > net.tanks[i].max_level + 1e-9) {
          rec.violation = true;
        }
      }
    } else {
      const Eigen::VectorXd p_out =
          setup.pressure.A_p * model_state + setup.pressure.B_p * rec.u;
      rec.step_cost = rec.price * setup.mpc_config.dt * rec.u.dot(p_out - p_in);
      model_state = setup.model.A_d * model_state + setup.model.B_d1 * rec.u +
                    setup.model.B_d2 * demand.realized[k];
      log.pumped_volume += rec.u.sum() * setup.mpc_config.dt;
      log.demand_volume += demand.realized[k] * setup.mpc_config.dt;
      rec.tank_levels = setup.aggregation.to_physical(model_state);
      rec.violation = false;
      for (int i = 0; i < model_state.size(); ++i) {
        if (model_state[i] < setup.mpc_config.state_lower[i] - 1e-9 ||
            model_state[i] > setup.mpc_config.state_upper[i] + 1e-9) {
          rec.violation = true;
        }
      }
    }

    log.total_cost += rec.step_cost;
    rec.cost_cum = log.total_cost;
    if (rec.violation) ++log.violation_count;
    log.records.push_back(std::move(rec));
  }

  log.fallback_count = controller.fallback_count();
  log.degraded_count = controller.degraded_count();
  if (plant_kind == PlantKind::hydraulic) {
    for (int t = 0; t < net.tank_count(); ++t) {
      log.final_volume += plant.tank_levels[t] * net.tanks[t].area;
    }
  } else {
    log.final_volume = model_state.dot(setup.aggregation.group_areas());
  }
  return log;
}

}  // namespace watermpc::sim
