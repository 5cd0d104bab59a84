#ifndef WATERMPC_SIM_REPORT_HPP
#define WATERMPC_SIM_REPORT_HPP

#include <string>
#include <utility>
#include <vector>

#include "watermpc/sim/runlog.hpp"

namespace watermpc::sim {

/// Comparison bundle for paired (proposed, follower) runs: the relative-cost
/// table (follower normalized to 1), per-run time series, and a summary with
/// violation/fallback counts and the price-flow correlation.
struct ReportBundle {
  std::string relative_costs_csv;
  std::string summary_json;
};

ReportBundle report(const std::vector<std::pair<RunLog, RunLog>>& pairs);

/// Writes relative_costs.csv, report_summary.json and per-run CSVs into
/// `out_dir`.
void write_report(const std::vector<std::pair<RunLog, RunLog>>& pairs,
                  const std::string& out_dir);

}  // namespace watermpc::sim

#endif
