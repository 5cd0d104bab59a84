#ifndef WATERMPC_SIM_RUNLOG_HPP
#define WATERMPC_SIM_RUNLOG_HPP

#include <Eigen/Core>

#include <string>
#include <vector>

namespace watermpc::sim {

struct RunRecord {
  double t = 0.0;               // hours since run start
  Eigen::VectorXd tank_levels;  // physical, post-step
  Eigen::VectorXd state;        // aggregated model state, pre-step measurement
  Eigen::VectorXd u;            // applied pump flows
  double price = 0.0;
  double d_real = 0.0;          // realized aggregated demand
  double d_forecast = 0.0;      // forecast the controller saw for this hour
  double step_cost = 0.0;       // plant-side electricity cost of the step
  double cost_cum = 0.0;
  bool feasible = true;         // the MPC solve of this step was optimal
  int fallback = 0;             // 0 none, 1 cached second term, 2 degraded periodic
  bool violation = false;       // some tank left its level band after the step
};

struct RunLog {
  std::vector<RunRecord> records;
  double total_cost = 0.0;
  int violation_count = 0;
  int fallback_count = 0;
  int degraded_count = 0;
  // Volume bookkeeping (m^3) for the conservation audit.
  double initial_volume = 0.0;
  double final_volume = 0.0;
  double pumped_volume = 0.0;
  double demand_volume = 0.0;
  double exchange_volume = 0.0;
  double clamped_volume = 0.0;

  int steps() const { return static_cast<int>(records.size()); }

  /// Pearson correlation between price and total applied flow.
  double price_flow_correlation() const;

  /// Relative volume-balance error of the run (fraction of demand volume).
  double volume_balance_error() const;

  /// CSV with columns t,h1,...,u1,...,u_total,price,d_real,d_forecast,
  /// cost_cum,feasible,fallback.
  void save_csv(const std::string& path) const;
  static RunLog load_csv(const std::string& path);

  std::string summary_json() const;
  void save_summary(const std::string& path) const;
};

}  // namespace watermpc::sim

#endif
