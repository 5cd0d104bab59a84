#ifndef WATERMPC_MPC_PERIODIC_HPP
#define WATERMPC_MPC_PERIODIC_HPP

#include <Eigen/Core>

#include <stdexcept>
#include <string>

#include "watermpc/mpc/config.hpp"
#include "watermpc/mpc/costs.hpp"
#include "watermpc/sysid/models.hpp"

namespace watermpc::mpc {

/// Minimum-cost one-day orbit: state trajectory whose final point equals its
/// initial point under the average demand and price profiles.
struct PeriodicTrajectory {
  Eigen::MatrixXd h_star;  // n x (T+1)
  Eigen::MatrixXd u_star;  // m x T
  Eigen::VectorXd d_star;  // T
  Eigen::VectorXd c_star;  // T
  double cost = 0.0;

  int steps() const { return static_cast<int>(u_star.cols()); }
  /// Periodicity residual ||h_0 - h_T||_inf.
  double periodicity_residual() const;
  void validate(const MpcConfig& config) const;

  std::string to_json() const;
  static PeriodicTrajectory from_json_text(const std::string& text);
  void save(const std::string& path) const;
  static PeriodicTrajectory load(const std::string& path);
};

class PeriodicInfeasible : public std::runtime_error {
 public:
  PeriodicInfeasible(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual(best_residual) {}
  double best_residual;
};

/// Solves the periodic optimization over decision (h_0, u_0..u_{T-1}) with
/// the dynamics eliminated by rollout and periodicity enforced through the
/// augmented-Lagrangian couplings.
PeriodicTrajectory compute_periodic_trajectory(
    const sysid::LinearDiscreteModel& model,
    const sysid::PressureModel& pressure, const Eigen::VectorXd& d_star,
    const Eigen::VectorXd& c_star, const MpcConfig& config);

}  // namespace watermpc::mpc

#endif
