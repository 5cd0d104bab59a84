#include "watermpc/sysid/fit.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "watermpc/hydro/steady_state.hpp"

namespace watermpc::sysid {

namespace {

struct Regression {
  Eigen::MatrixXd coeffs;        // cols(X) x cols(Y)
  Eigen::VectorXd residual_rms;  // per output column
};

// Plain least squares via column-pivoted QR; optional ridge through the
// normal equations. Throws RankDeficient below full column rank.
Regression least_squares(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                         const FitOptions& options, const char* what) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(options.rank_tol);
  if (qr.rank() < X.cols()) {
    throw RankDeficient(std::string(what) + ": regressor rank " +
                        std::to_string(qr.rank()) + " < " +
                        std::to_string(X.cols()) +
                        " (excitation insufficient)");
  }
  Regression reg;
  if (options.ridge > 0.0) {
    const Eigen::MatrixXd G =
        X.transpose() * X +
        options.ridge * Eigen::MatrixXd::Identity(X.cols(), X.cols());
    reg.coeffs = G.ldlt().solve(X.transpose() * Y);
  } else {
    reg.coeffs = qr.solve(Y);
  }
  const Eigen::MatrixXd R = Y - X * reg.coeffs;
  reg.residual_rms.resize(Y.cols());
  for (int c = 0; c < Y.cols(); ++c) {
    reg.residual_rms[c] = std::sqrt(R.col(c).squaredNorm() / R.rows());
  }
  return reg;
}

}  // namespace

LinearDiscreteModel fit_state_model(const Dataset& dataset,
                                    const FitOptions& options,
                                    FitDiagnostics* diagnostics) {
  dataset.validate();
  const int n = dataset.n, m = dataset.m;
  const int rows = dataset.size();
  Eigen::MatrixXd X(rows, n + m + 1);
  Eigen::MatrixXd Y(rows, n);
  for (int k = 0; k < rows; ++k) {
    const auto& r = dataset.records[k];
    X.block(k, 0, 1, n) = r.h.transpose();
    X.block(k, n, 1, m) = r.u.transpose();
    X(k, n + m) = r.d_a;
    Y.row(k) = r.h_next.transpose();
  }
  const Regression reg = least_squares(X, Y, options, "state model fit");

  LinearDiscreteModel model;
  model.n = n;
  model.m = m;
  model.dt = dataset.dt;
  model.A_d = reg.coeffs.topRows(n).transpose();
  model.B_d1 = reg.coeffs.middleRows(n, m).transpose();
  model.B_d2 = reg.coeffs.bottomRows(1).transpose();
  model.validate();
  if (diagnostics) diagnostics->residual_rms = reg.residual_rms;
  return model;
}

PressureModel fit_pressure_model(const Dataset& dataset,
                                 const hydro::NetworkTopology& topology,
                                 const FitOptions& options,
                                 FitDiagnostics* diagnostics) {
  dataset.validate();
  const int n = dataset.n, m = dataset.m;
  if (m != topology.pump_count()) {
    throw std::invalid_argument("dataset input count does not match topology pumps");
  }
  const int rows = dataset.size();
  Eigen::MatrixXd X(rows, n + m);
  Eigen::MatrixXd Y(rows, m);
  for (int k = 0; k < rows; ++k) {
    const auto& r = dataset.records[k];
    X.block(k, 0, 1, n) = r.h.transpose();
    X.block(k, n, 1, m) = r.u.transpose();
    Y.row(k) = r.p_out.transpose();
  }
  const Regression reg = least_squares(X, Y, options, "pressure model fit");

  PressureModel model;
  model.A_p = reg.coeffs.topRows(n).transpose();
  model.B_p = reg.coeffs.bottomRows(m).transpose();
  model.p_in = hydro::pump_inlet_pressures(topology);
  model.validate();
  if (diagnostics) diagnostics->residual_rms = reg.residual_rms;
  return model;
}

Eigen::VectorXd state_prediction_rms(const LinearDiscreteModel& model,
                                     const Dataset& dataset) {
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(model.n);
  for (const auto& r : dataset.records) {
    const Eigen::VectorXd pred =
        model.A_d * r.h + model.B_d1 * r.u + model.B_d2 * Eigen::VectorXd::Constant(1, r.d_a);
    sq += (r.h_next - pred).cwiseAbs2();
  }
  return (sq / dataset.size()).cwiseSqrt();
}

Eigen::VectorXd pressure_prediction_rms(const PressureModel& model,
                                        const Dataset& dataset) {
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(model.p_in.size());
  for (const auto& r : dataset.records) {
    const Eigen::VectorXd pred = model.A_p * r.h + model.B_p * r.u;
    sq += (r.p_out - pred).cwiseAbs2();
  }
  return (sq / dataset.size()).cwiseSqrt();
}

}  // namespace watermpc::sysid
