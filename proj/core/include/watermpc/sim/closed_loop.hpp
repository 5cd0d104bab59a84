#ifndef WATERMPC_SIM_CLOSED_LOOP_HPP
#define WATERMPC_SIM_CLOSED_LOOP_HPP

#include <optional>

#include "watermpc/hydro/plant.hpp"
#include "watermpc/mpc/controller.hpp"
#include "watermpc/mpc/periodic.hpp"
#include "watermpc/sim/runlog.hpp"
#include "watermpc/sim/scenario.hpp"
#include "watermpc/sysid/excitation.hpp"
#include "watermpc/sysid/fit.hpp"
#include "watermpc/sysid/models.hpp"

namespace watermpc::sim {

/// Identification artifacts plus everything needed to run a scenario.
struct SimulationSetup {
  hydro::NetworkTopology topology;
  sysid::TankAggregation aggregation;
  sysid::LinearDiscreteModel model;
  sysid::PressureModel pressure;
  mpc::MpcConfig mpc_config;
  mpc::PeriodicTrajectory periodic;
  Eigen::VectorXd state_rms_holdout;
  Eigen::VectorXd pressure_rms_holdout;
  Eigen::VectorXd base_da;  // aggregated daily demand profile
};

/// Runs the identification pipeline (excite, collect, fit, hold-out check)
/// on the scenario's plant. `dataset_out`, when set, receives the training
/// dataset for persistence.
SimulationSetup identify(const ScenarioConfig& scenario,
                         sysid::Dataset* dataset_out = nullptr);

/// Replaces the identification stage with previously saved artifacts.
SimulationSetup setup_from_artifacts(const ScenarioConfig& scenario,
                                     const sysid::LinearDiscreteModel& model,
                                     const sysid::PressureModel& pressure,
                                     std::optional<mpc::PeriodicTrajectory> periodic);

/// Computes the optimal periodic trajectory for the scenario's price and
/// average demand profiles and stores it in the setup.
void compute_periodic(const ScenarioConfig& scenario, SimulationSetup* setup);

enum class PlantKind {
  hydraulic,  // full nonlinear plant
  linear,     // the identified model itself (zero-mismatch stand-in)
};

/// Closed-loop run: measure, aggregate, solve, apply, log. The plant always
/// receives inputs clamped to [0, u_max].
RunLog run_closed_loop(const ScenarioConfig& scenario, SimulationSetup& setup,
                       PlantKind plant = PlantKind::hydraulic);

}  // namespace watermpc::sim

#endif
