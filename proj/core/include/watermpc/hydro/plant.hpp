#ifndef WATERMPC_HYDRO_PLANT_HPP
#define WATERMPC_HYDRO_PLANT_HPP

#include <Eigen/Core>

#include "watermpc/hydro/network.hpp"
#include "watermpc/hydro/steady_state.hpp"

namespace watermpc::hydro {

struct PlantState {
  Eigen::VectorXd tank_levels;  // m, per tank
  Eigen::VectorXd node_heads;   // last solve
  Eigen::VectorXd link_flows;   // last solve
  double sim_time = 0.0;        // hours
};

/// State at the topology's declared initial levels, hydraulics unsolved.
PlantState initial_state(const NetworkTopology& topology);

struct StepOptions {
  // Explicit Euler with automatic sub-stepping. `max_level_change` bounds the
  // level change of any tank within one sub-step; the pairwise-gap limiter
  // below additionally prevents overshooting tank-level equalization, floored
  // at `min_substep` hours.
  double max_level_change = 0.005;  // m
  double min_substep = 1.0 / 60.0;  // h
  double gap_safety = 0.8;
  SolveOptions solve;
};

struct StepResult {
  PlantState state;
  bool depleted = false;  // some tank clamped at empty
  bool overflow = false;  // some tank clamped at its top
  int substeps = 0;
  // Volume bookkeeping over the step (m^3), for conservation audits.
  double pumped_volume = 0.0;
  double demand_volume = 0.0;
  double reservoir_exchange_volume = 0.0;  // net pipe flow out of reservoirs
  double clamped_volume = 0.0;             // discarded by depletion/overflow clamps
};

/// Advances tank levels by dt hours holding pump flows and demands constant.
/// Each sub-step re-solves the steady-state hydraulics at the current levels.
StepResult step(const NetworkTopology& topology, const PlantState& state,
                const Eigen::VectorXd& pump_flows,
                const Eigen::VectorXd& junction_demands, double dt,
                const StepOptions& options = {});

}  // namespace watermpc::hydro

#endif
