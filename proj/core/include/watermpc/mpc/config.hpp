#ifndef WATERMPC_MPC_CONFIG_HPP
#define WATERMPC_MPC_CONFIG_HPP

#include <Eigen/Core>

#include <stdexcept>

#include "watermpc/opt/solver.hpp"

namespace watermpc::mpc {

/// Controller parameters. Barrier coefficients are indexed per inequality,
/// two per state in the order (lower bound of state i, upper bound of state
/// i); an entry of a == 0 disables that barrier term.
struct MpcConfig {
  Eigen::VectorXd state_lower;   // n
  Eigen::VectorXd state_upper;   // n
  Eigen::VectorXd input_upper;   // m; lower bounds are 0
  Eigen::VectorXd barrier_a;     // 2n, default 80
  Eigen::VectorXd barrier_b;     // 2n, default 0.3 m
  double terminal_radius = 0.05; // m, Euclidean ball
  double dt = 1.0;               // h
  double t_day = 24.0;           // h
  opt::SolverConfig solver;

  int n() const { return static_cast<int>(state_lower.size()); }
  int m() const { return static_cast<int>(input_upper.size()); }
  int steps_per_day() const;

  /// Fills barrier vectors with the defaults (a=80, b=0.3) sized 2n.
  void apply_barrier_defaults();
  void validate() const;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Shrinking-horizon length: steps remaining until the next day boundary.
/// `t` must lie on the dt grid.
int horizon_length(double t, double t_day, double dt);

}  // namespace watermpc::mpc

#endif
