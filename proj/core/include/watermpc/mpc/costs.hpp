#ifndef WATERMPC_MPC_COSTS_HPP
#define WATERMPC_MPC_COSTS_HPP

#include <Eigen/Core>

#include "watermpc/mpc/config.hpp"
#include "watermpc/sysid/models.hpp"

namespace watermpc::mpc {

struct BarrierEval {
  double value = 0.0;
  bool capped = false;  // some exponent exceeded the overflow guard
};

/// Sum of exponential barrier terms exp(a_i (C_i(h) + b_i)) with C the signed
/// distances past the state bounds. Exponents above 700 switch to a linear
/// extension so the value stays finite; `capped` reports it.
BarrierEval barrier_cost(const Eigen::VectorXd& h, const MpcConfig& config);

/// Gradient of barrier_cost with respect to h.
Eigen::VectorXd barrier_gradient(const Eigen::VectorXd& h, const MpcConfig& config);

/// Economic stage cost: c * u^T (A_p h + B_p u - p_in) plus the barrier terms.
double stage_cost(const Eigen::VectorXd& h, const Eigen::VectorXd& u, double price,
                  const sysid::PressureModel& pressure, const MpcConfig& config);

/// Applies the discrete dynamics N times; returns n x (N+1) including h0.
Eigen::MatrixXd rollout(const sysid::LinearDiscreteModel& model,
                        const Eigen::VectorXd& h0, const Eigen::MatrixXd& u_seq,
                        const Eigen::VectorXd& d_seq);

/// Horizon objective sum_j stage_cost(h_j, u_j, c_j) as a function of the
/// flattened input sequence (h0 fixed), with its analytic gradient.
std::pair<double, Eigen::VectorXd> objective_and_gradient(
    const sysid::LinearDiscreteModel& model, const sysid::PressureModel& pressure,
    const Eigen::VectorXd& h0, const Eigen::VectorXd& u_flat,
    const Eigen::VectorXd& d_seq, const Eigen::VectorXd& c_seq,
    const MpcConfig& config);

/// Affine map of the state trajectory in the decision vector: h_s = c_s + Phi_s x
/// where x is either u_flat (fixed h0) or [h0; u_flat] (free h0). Used to expose
/// state-box and terminal constraints with constant gradients.
struct AffineTrajectory {
  // offsets.col(s) + sensitivities[s] * x == h_s, s = 0..N
  Eigen::MatrixXd offsets;                    // n x (N+1)
  std::vector<Eigen::MatrixXd> sensitivities; // N+1 entries, n x dim
  int horizon = 0;
  int dim = 0;

  static AffineTrajectory fixed_h0(const sysid::LinearDiscreteModel& model,
                                   const Eigen::VectorXd& h0,
                                   const Eigen::VectorXd& d_seq);
  static AffineTrajectory free_h0(const sysid::LinearDiscreteModel& model,
                                  const Eigen::VectorXd& d_seq);

  Eigen::VectorXd state_at(int s, const Eigen::VectorXd& x) const {
    return offsets.col(s) + sensitivities[s] * x;
  }
};

}  // namespace watermpc::mpc

#endif
