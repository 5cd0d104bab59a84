#ifndef WATERMPC_SYSID_FIT_HPP
#define WATERMPC_SYSID_FIT_HPP

#include <Eigen/Core>

#include <stdexcept>

#include "watermpc/hydro/network.hpp"
#include "watermpc/sysid/dataset.hpp"
#include "watermpc/sysid/models.hpp"

namespace watermpc::sysid {

class RankDeficient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FitOptions {
  double ridge = 0.0;       // optional Tikhonov weight; 0 keeps plain LS
  double rank_tol = 1e-9;   // relative threshold for the rank check
};

struct FitDiagnostics {
  Eigen::VectorXd residual_rms;  // per output row
};

/// Least-squares fit of h_next ~ A_d h + B_d1 u + B_d2 d_a over the dataset.
/// Throws RankDeficient when the regressor matrix has numerical rank below
/// n + m + 1.
LinearDiscreteModel fit_state_model(const Dataset& dataset,
                                    const FitOptions& options = {},
                                    FitDiagnostics* diagnostics = nullptr);

/// Least-squares fit of p_out ~ A_p h + B_p u; inlet pressures copied from
/// the topology's reservoir heads (pump order).
PressureModel fit_pressure_model(const Dataset& dataset,
                                 const hydro::NetworkTopology& topology,
                                 const FitOptions& options = {},
                                 FitDiagnostics* diagnostics = nullptr);

/// One-step prediction RMS per state of `model` on `dataset`.
Eigen::VectorXd state_prediction_rms(const LinearDiscreteModel& model,
                                     const Dataset& dataset);

/// Prediction RMS per pump of `model` on `dataset`.
Eigen::VectorXd pressure_prediction_rms(const PressureModel& model,
                                        const Dataset& dataset);

}  // namespace watermpc::sysid

#endif
