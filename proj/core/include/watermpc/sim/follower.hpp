#ifndef WATERMPC_SIM_FOLLOWER_HPP
#define WATERMPC_SIM_FOLLOWER_HPP

#include <stdexcept>

#include "watermpc/sim/closed_loop.hpp"

namespace watermpc::sim {

class BenchmarkInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Demand-follower benchmark: total commanded flow tracks the realized
/// aggregated demand (split across pumps proportionally to capacity), with a
/// uniform flow offset found by bisection so the end-of-run state lands in
/// the terminal ball around h*_T. Per-pump clamping to [0, u_max] is kept.
/// Throws BenchmarkInfeasible when no offset reaches the ball.
RunLog demand_follower(const ScenarioConfig& scenario, SimulationSetup& setup);

}  // namespace watermpc::sim

#endif
