#ifndef WATERMPC_MPC_SOLVE_HPP
#define WATERMPC_MPC_SOLVE_HPP

#include <Eigen/Core>

#include "watermpc/mpc/config.hpp"
#include "watermpc/mpc/periodic.hpp"
#include "watermpc/sysid/models.hpp"

namespace watermpc::mpc {

enum class MpcStatus { optimal, infeasible, max_iter };
const char* to_string(MpcStatus s);

struct MpcSolution {
  Eigen::MatrixXd u_seq;  // m x N
  Eigen::MatrixXd h_seq;  // n x (N+1), predicted under the model
  double objective = 0.0;
  MpcStatus status = MpcStatus::infeasible;
  int iterations = 0;
  double max_violation = 0.0;
};

/// One shrinking-horizon solve at time t from measured state h_t. Forecast
/// vectors must have length N(t). Infeasibility is reported in the status,
/// never thrown. `warm_start` (m x N, optional) seeds the input sequence;
/// otherwise the periodic trajectory segment for this time of day is used.
MpcSolution solve_mpc(const Eigen::VectorXd& h_t, double t,
                      const Eigen::VectorXd& d_forecast,
                      const Eigen::VectorXd& c_forecast,
                      const PeriodicTrajectory& periodic,
                      const sysid::LinearDiscreteModel& model,
                      const sysid::PressureModel& pressure,
                      const MpcConfig& config,
                      const Eigen::MatrixXd* warm_start = nullptr);

}  // namespace watermpc::mpc

#endif
