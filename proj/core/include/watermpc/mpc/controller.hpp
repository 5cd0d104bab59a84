#ifndef WATERMPC_MPC_CONTROLLER_HPP
#define WATERMPC_MPC_CONTROLLER_HPP

#include <Eigen/Core>

#include <optional>

#include "watermpc/mpc/solve.hpp"

namespace watermpc::mpc {

/// How the applied input of a step was obtained.
enum class InputSource {
  mpc,       // fresh optimal solve
  cached,    // Bellman fallback: later term of the previous solution
  periodic,  // degraded: clamped periodic input for this hour
};

/// Receding-horizon state machine. On an infeasible solve it applies the
/// matching term of the last successful solution (the second term when that
/// solution is one step old); with no usable cache it falls back to the
/// periodic input for the hour, flagged as degraded.
class Controller {
 public:
  Controller(sysid::LinearDiscreteModel model, sysid::PressureModel pressure,
             PeriodicTrajectory periodic, MpcConfig config);

  struct StepResult {
    Eigen::VectorXd u;           // applied input, clamped to [0, u_max]
    InputSource source = InputSource::mpc;
    MpcStatus solve_status = MpcStatus::infeasible;
    double objective = 0.0;
    MpcSolution solution;        // the solve of this step (any status)
  };

  /// One controller step at time t (hours, on the dt grid) from the measured
  /// model state. Forecasts must cover the horizon N(t). Total function:
  /// always returns an applicable input.
  StepResult step(const Eigen::VectorXd& h_model, double t,
                  const Eigen::VectorXd& d_forecast,
                  const Eigen::VectorXd& c_forecast);

  int fallback_count() const { return fallback_count_; }
  int degraded_count() const { return degraded_count_; }
  const MpcConfig& config() const { return config_; }
  MpcConfig& config() { return config_; }
  const PeriodicTrajectory& periodic() const { return periodic_; }

 private:
  sysid::LinearDiscreteModel model_;
  sysid::PressureModel pressure_;
  PeriodicTrajectory periodic_;
  MpcConfig config_;

  std::optional<MpcSolution> last_good_;
  double last_good_time_ = 0.0;
  int fallback_count_ = 0;
  int degraded_count_ = 0;
};

}  // namespace watermpc::mpc

#endif
