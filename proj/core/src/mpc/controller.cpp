#include "watermpc/mpc/controller.hpp"

#include <cmath>

namespace watermpc::mpc {

Controller::Controller(sysid::LinearDiscreteModel model,
                       sysid::PressureModel pressure,
                       PeriodicTrajectory periodic, MpcConfig config)
    : model_(std::move(model)),
      pressure_(std::move(pressure)),
      periodic_(std::move(periodic)),
      config_(std::move(config)) {
  config_.validate();
  model_.validate();
}

Controller::StepResult Controller::step(const Eigen::VectorXd& h_model, double t,
                                        const Eigen::VectorXd& d_forecast,
                                        const Eigen::VectorXd& c_forecast) {
  const int N = horizon_length(t, config_.t_day, config_.dt);
  const int m = config_.m();

  // Shift the previous solution by the elapsed steps when it still covers
  // this horizon (same day), and use it as the warm start.
  Eigen::MatrixXd shifted;
  const Eigen::MatrixXd* warm = nullptr;
  if (last_good_) {
    const int offset =
        static_cast<int>(std::lround((t - last_good_time_) / config_.dt));
    const int prev_n = static_cast<int>(last_good_->u_seq.cols());
    if (offset >= 1 && prev_n - offset == N) {
      shifted = last_good_->u_seq.rightCols(N);
      warm = &shifted;
    }
  }

  StepResult out;
  out.solution = solve_mpc(h_model, t, d_forecast, c_forecast, periodic_, model_,
                           pressure_, config_, warm);
  out.solve_status = out.solution.status;
  out.objective = out.solution.objective;

  if (out.solution.status == MpcStatus::optimal) {
    out.u = out.solution.u_seq.col(0);
    out.source = InputSource::mpc;
    last_good_ = out.solution;
    last_good_time_ = t;
  } else {
    // The input this hour as computed by the last successful solve: its
    // second term when that solve is one step old (Bellman fallback).
    const int offset = last_good_
        ? static_cast<int>(std::lround((t - last_good_time_) / config_.dt))
        : 0;
    if (last_good_ && offset >= 1 &&
        offset < static_cast<int>(last_good_->u_seq.cols())) {
      out.u = last_good_->u_seq.col(offset);
      out.source = InputSource::cached;
      ++fallback_count_;
    } else {
      const int T = periodic_.steps();
      const int k = static_cast<int>(std::lround(t / config_.dt)) % T;
      out.u = periodic_.u_star.col(k);
      out.source = InputSource::periodic;
      ++degraded_count_;
    }
  }
  out.u = out.u.cwiseMax(Eigen::VectorXd::Zero(m)).cwiseMin(config_.input_upper);
  return out;
}

}  // namespace watermpc::mpc
