#ifndef WATERMPC_SYSID_MODELS_HPP
#define WATERMPC_SYSID_MODELS_HPP

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace watermpc::sysid {

/// Discrete-time reduced tank model h(k+1) = A_d h(k) + B_d1 u(k) + B_d2 d(k)
/// with aggregated demand d as a scalar disturbance.
struct LinearDiscreteModel {
  Eigen::MatrixXd A_d;   // n x n
  Eigen::MatrixXd B_d1;  // n x m
  Eigen::MatrixXd B_d2;  // n x 1
  double dt = 1.0;       // hours
  int n = 0;
  int m = 0;

  /// Checks dimensions, finiteness and that the spectral radius of A_d stays
  /// within 1 + 1e-6 (tank dynamics are non-expansive integrators).
  void validate() const;
};

/// Static pump outlet-pressure model p_out = A_p h + B_p u, with constant
/// inlet pressures taken from the reservoir heads.
struct PressureModel {
  Eigen::MatrixXd A_p;  // m x n
  Eigen::MatrixXd B_p;  // m x m
  Eigen::VectorXd p_in; // m

  void validate() const;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// JSON persistence (matrices row-major with dimension metadata).
std::string models_to_json(const LinearDiscreteModel& state_model,
                           const PressureModel& pressure_model,
                           const std::vector<std::vector<std::string>>& tank_groups,
                           const Eigen::VectorXd& state_rms_holdout,
                           const Eigen::VectorXd& pressure_rms_holdout);
void models_from_json_text(const std::string& text, LinearDiscreteModel* state_model,
                           PressureModel* pressure_model,
                           std::vector<std::vector<std::string>>* tank_groups);
void save_models(const std::string& path, const LinearDiscreteModel& state_model,
                 const PressureModel& pressure_model,
                 const std::vector<std::vector<std::string>>& tank_groups,
                 const Eigen::VectorXd& state_rms_holdout,
                 const Eigen::VectorXd& pressure_rms_holdout);
void load_models(const std::string& path, LinearDiscreteModel* state_model,
                 PressureModel* pressure_model,
                 std::vector<std::vector<std::string>>* tank_groups);

}  // namespace watermpc::sysid

#endif
