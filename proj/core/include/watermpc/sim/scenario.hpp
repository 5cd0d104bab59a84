#ifndef WATERMPC_SIM_SCENARIO_HPP
#define WATERMPC_SIM_SCENARIO_HPP

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "watermpc/hydro/network.hpp"
#include "watermpc/mpc/config.hpp"
#include "watermpc/sysid/aggregation.hpp"

namespace watermpc::sim {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SysidOptions {
  std::uint64_t seed = 7;
  int episodes = 40;
  int episode_length = 48;
  double ridge = 0.0;
  double holdout_fraction = 0.2;
};

/// Controller options as written in the scenario file; state bounds default
/// to the aggregated tank bounds of the topology unless overridden.
struct MpcOptions {
  double terminal_radius = 0.05;
  double barrier_a = 80.0;
  double barrier_b = 0.3;
  double dt = 1.0;
  double t_day = 24.0;
  std::optional<Eigen::VectorXd> state_lower;
  std::optional<Eigen::VectorXd> state_upper;
  opt::SolverConfig solver;
};

struct ScenarioConfig {
  std::string topology_path;
  Eigen::VectorXd price;            // steps_per_day entries
  Eigen::MatrixXd demand_profiles;  // steps_per_day x junction_count
  std::uint64_t perturb_seed = 1;
  double perturb_amplitude = 0.05;
  int days = 1;
  // Initial physical tank levels; empty means start on the periodic orbit.
  std::optional<Eigen::VectorXd> initial_levels;
  MpcOptions mpc;
  SysidOptions sysid;
  std::string output_dir = "out";

  int steps_per_day() const { return static_cast<int>(price.size()); }
  void validate(const hydro::NetworkTopology& topology) const;

  /// Parses a scenario JSON file; relative paths resolve against its folder.
  static ScenarioConfig load(const std::string& path);
};

/// Fills an MpcConfig from the options, deriving default state bounds from
/// the aggregated tank bounds.
mpc::MpcConfig build_mpc_config(const MpcOptions& options,
                                const sysid::TankAggregation& aggregation,
                                const hydro::NetworkTopology& topology);

}  // namespace watermpc::sim

#endif
