#include "watermpc/mpc/solve.hpp"

#include <cmath>

#include "watermpc/mpc/costs.hpp"

namespace watermpc::mpc {

const char* to_string(MpcStatus s) {
  switch (s) {
    case MpcStatus::optimal: return "optimal";
    case MpcStatus::infeasible: return "infeasible";
    case MpcStatus::max_iter: return "max-iter";
  }
  return "unknown";
}

MpcSolution solve_mpc(const Eigen::VectorXd& h_t, double t,
                      const Eigen::VectorXd& d_forecast,
                      const Eigen::VectorXd& c_forecast,
                      const PeriodicTrajectory& periodic,
                      const sysid::LinearDiscreteModel& model,
                      const sysid::PressureModel& pressure,
                      const MpcConfig& config, const Eigen::MatrixXd* warm_start) {
  const int n = model.n, m = model.m;
  const int N = horizon_length(t, config.t_day, config.dt);
  if (d_forecast.size() != N || c_forecast.size() != N) {
    throw std::invalid_argument("forecast length must equal the horizon N(t)");
  }
  if (h_t.size() != n || !h_t.allFinite()) {
    throw std::invalid_argument("measured state must be finite with n entries");
  }
  const int T = periodic.steps();
  const Eigen::VectorXd h_ref = periodic.h_star.col(T);

  const AffineTrajectory traj = AffineTrajectory::fixed_h0(model, h_t, d_forecast);
  const int dim = m * N;

  opt::SmoothProblem problem;
  problem.dim = dim;
  problem.lower = Eigen::VectorXd::Zero(dim);
  problem.upper.resize(dim);
  for (int k = 0; k < N; ++k) problem.upper.segment(k * m, m) = config.input_upper;

  problem.objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    auto [value, g] = objective_and_gradient(model, pressure, h_t, x, d_forecast,
                                             c_forecast, config);
    if (grad) *grad = std::move(g);
    return value;
  };

  // Predicted states must respect the hard box from step 1 on (h_0 is the
  // measurement and may sit outside; the barrier handles it).
  for (int s = 1; s <= N; ++s) {
    for (int i = 0; i < n; ++i) {
      const Eigen::RowVectorXd row = traj.sensitivities[s].row(i);
      const double off = traj.offsets(i, s);
      const double lo = config.state_lower[i];
      const double hi = config.state_upper[i];
      problem.inequalities.push_back(
          {[row, off, lo](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
             if (g) *g = -row.transpose();
             return lo - (off + row.dot(x));
           },
           "h_lo[" + std::to_string(s) + "," + std::to_string(i) + "]"});
      problem.inequalities.push_back(
          {[row, off, hi](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
             if (g) *g = row.transpose();
             return (off + row.dot(x)) - hi;
           },
           "h_hi[" + std::to_string(s) + "," + std::to_string(i) + "]"});
    }
  }
  // Terminal ball ||h_N - h*_T||_2 <= r, kept smooth in squared form.
  {
    const Eigen::MatrixXd Phi_N = traj.sensitivities[N];
    const Eigen::VectorXd off_N = traj.offsets.col(N);
    const double r2 = config.terminal_radius * config.terminal_radius;
    problem.inequalities.push_back(
        {[Phi_N, off_N, h_ref, r2](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
           const Eigen::VectorXd e = off_N + Phi_N * x - h_ref;
           if (g) *g = 2.0 * Phi_N.transpose() * e;
           return e.squaredNorm() - r2;
         },
         "terminal_ball"});
  }

  // Warm start: caller-provided shifted sequence, else the periodic inputs
  // for this time of day.
  Eigen::VectorXd x0(dim);
  if (warm_start && warm_start->rows() == m && warm_start->cols() == N) {
    x0 = Eigen::Map<const Eigen::VectorXd>(warm_start->data(), dim);
  } else {
    const int k0 = static_cast<int>(std::lround(t / config.dt)) % T;
    for (int k = 0; k < N; ++k) {
      x0.segment(k * m, m) = periodic.u_star.col((k0 + k) % T);
    }
  }

  const opt::SolverResult res = opt::minimize(problem, x0, config.solver);

  MpcSolution sol;
  sol.u_seq = Eigen::Map<const Eigen::MatrixXd>(res.x.data(), m, N);
  sol.h_seq = rollout(model, h_t, sol.u_seq, d_forecast);
  sol.objective = res.objective;
  sol.iterations = res.inner_iterations;
  sol.max_violation = res.max_violation;
  switch (res.status) {
    case opt::SolveStatus::optimal: sol.status = MpcStatus::optimal; break;
    case opt::SolveStatus::infeasible: sol.status = MpcStatus::infeasible; break;
    case opt::SolveStatus::max_iter: sol.status = MpcStatus::max_iter; break;
  }
  return sol;
}

}  // namespace watermpc::mpc
