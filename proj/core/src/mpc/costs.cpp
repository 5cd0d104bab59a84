#include "watermpc/mpc/costs.hpp"

#include <cmath>

namespace watermpc::mpc {

namespace {

constexpr double kExpCap = 700.0;  // exp(709.8) overflows a double

// Barrier term and its derivative with respect to the exponent argument
// x = a (C + b). Beyond the cap the term continues linearly so gradients keep
// pointing back toward the feasible side.
inline double barrier_term(double x, bool* capped) {
  if (x <= kExpCap) return std::exp(x);
  *capped = true;
  return std::exp(kExpCap) * (1.0 + (x - kExpCap));
}

inline double barrier_term_slope(double x) {
  return std::exp(std::min(x, kExpCap));
}

}  // namespace

BarrierEval barrier_cost(const Eigen::VectorXd& h, const MpcConfig& config) {
  const int n = config.n();
  if (h.size() != n) throw ConfigError("barrier_cost: state size mismatch");
  if (!h.allFinite()) throw ConfigError("barrier_cost: state must be finite");
  BarrierEval out;
  for (int s = 0; s < n; ++s) {
    const double a_lo = config.barrier_a[2 * s];
    const double a_hi = config.barrier_a[2 * s + 1];
    if (a_lo > 0) {
      const double c = config.state_lower[s] - h[s];
      out.value += barrier_term(a_lo * (c + config.barrier_b[2 * s]), &out.capped);
    }
    if (a_hi > 0) {
      const double c = h[s] - config.state_upper[s];
      out.value += barrier_term(a_hi * (c + config.barrier_b[2 * s + 1]), &out.capped);
    }
  }
  return out;
}

Eigen::VectorXd barrier_gradient(const Eigen::VectorXd& h, const MpcConfig& config) {
  const int n = config.n();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  for (int s = 0; s < n; ++s) {
    const double a_lo = config.barrier_a[2 * s];
    const double a_hi = config.barrier_a[2 * s + 1];
    if (a_lo > 0) {
      const double x = a_lo * (config.state_lower[s] - h[s] + config.barrier_b[2 * s]);
      g[s] -= a_lo * barrier_term_slope(x);
    }
    if (a_hi > 0) {
      const double x = a_hi * (h[s] - config.state_upper[s] + config.barrier_b[2 * s + 1]);
      g[s] += a_hi * barrier_term_slope(x);
    }
  }
  return g;
}

double stage_cost(const Eigen::VectorXd& h, const Eigen::VectorXd& u, double price,
                  const sysid::PressureModel& pressure, const MpcConfig& config) {
  const Eigen::VectorXd p_out = pressure.A_p * h + pressure.B_p * u;
  return price * u.dot(p_out - pressure.p_in) + barrier_cost(h, config).value;
}

Eigen::MatrixXd rollout(const sysid::LinearDiscreteModel& model,
                        const Eigen::VectorXd& h0, const Eigen::MatrixXd& u_seq,
                        const Eigen::VectorXd& d_seq) {
  const int N = static_cast<int>(u_seq.cols());
  if (h0.size() != model.n || u_seq.rows() != model.m || d_seq.size() != N) {
    throw std::invalid_argument("rollout: dimension mismatch");
  }
  Eigen::MatrixXd h(model.n, N + 1);
  h.col(0) = h0;
  for (int k = 0; k < N; ++k) {
    h.col(k + 1) =
        model.A_d * h.col(k) + model.B_d1 * u_seq.col(k) + model.B_d2 * d_seq[k];
  }
  return h;
}

std::pair<double, Eigen::VectorXd> objective_and_gradient(
    const sysid::LinearDiscreteModel& model, const sysid::PressureModel& pressure,
    const Eigen::VectorXd& h0, const Eigen::VectorXd& u_flat,
    const Eigen::VectorXd& d_seq, const Eigen::VectorXd& c_seq,
    const MpcConfig& config) {
  const int m = model.m;
  const int N = static_cast<int>(d_seq.size());
  if (u_flat.size() != m * N || c_seq.size() != N) {
    throw std::invalid_argument("objective_and_gradient: dimension mismatch");
  }
  const Eigen::Map<const Eigen::MatrixXd> u_seq(u_flat.data(), m, N);
  const Eigen::MatrixXd h = rollout(model, h0, u_seq, d_seq);

  double value = 0.0;
  Eigen::VectorXd grad(m * N);
  Eigen::VectorXd adjoint = Eigen::VectorXd::Zero(model.n);  // dJ_tail/dh_{j+1}
  for (int j = N - 1; j >= 0; --j) {
    const Eigen::VectorXd u = u_seq.col(j);
    const Eigen::VectorXd hj = h.col(j);
    const Eigen::VectorXd p_out = pressure.A_p * hj + pressure.B_p * u;
    value += c_seq[j] * u.dot(p_out - pressure.p_in) + barrier_cost(hj, config).value;

    grad.segment(j * m, m) = c_seq[j] * (p_out - pressure.p_in) +
                             c_seq[j] * pressure.B_p.transpose() * u +
                             model.B_d1.transpose() * adjoint;
    const Eigen::VectorXd stage_dh =
        c_seq[j] * pressure.A_p.transpose() * u + barrier_gradient(hj, config);
    adjoint = stage_dh + model.A_d.transpose() * adjoint;
  }
  return {value, std::move(grad)};
}

AffineTrajectory AffineTrajectory::fixed_h0(const sysid::LinearDiscreteModel& model,
                                            const Eigen::VectorXd& h0,
                                            const Eigen::VectorXd& d_seq) {
  AffineTrajectory traj;
  const int N = static_cast<int>(d_seq.size());
  traj.horizon = N;
  traj.dim = model.m * N;
  traj.offsets.resize(model.n, N + 1);
  traj.sensitivities.assign(N + 1, Eigen::MatrixXd::Zero(model.n, traj.dim));
  traj.offsets.col(0) = h0;
  for (int k = 0; k < N; ++k) {
    traj.offsets.col(k + 1) = model.A_d * traj.offsets.col(k) + model.B_d2 * d_seq[k];
    traj.sensitivities[k + 1] = model.A_d * traj.sensitivities[k];
    traj.sensitivities[k + 1].middleCols(k * model.m, model.m) += model.B_d1;
  }
  return traj;
}

AffineTrajectory AffineTrajectory::free_h0(const sysid::LinearDiscreteModel& model,
                                           const Eigen::VectorXd& d_seq) {
  AffineTrajectory traj;
  const int N = static_cast<int>(d_seq.size());
  traj.horizon = N;
  traj.dim = model.n + model.m * N;
  traj.offsets = Eigen::MatrixXd::Zero(model.n, N + 1);
  traj.sensitivities.assign(N + 1, Eigen::MatrixXd::Zero(model.n, traj.dim));
  traj.sensitivities[0].leftCols(model.n) = Eigen::MatrixXd::Identity(model.n, model.n);
  for (int k = 0; k < N; ++k) {
    traj.offsets.col(k + 1) = model.A_d * traj.offsets.col(k) + model.B_d2 * d_seq[k];
    traj.sensitivities[k + 1] = model.A_d * traj.sensitivities[k];
    traj.sensitivities[k + 1].middleCols(model.n + k * model.m, model.m) += model.B_d1;
  }
  return traj;
}

}  // namespace watermpc::mpc
