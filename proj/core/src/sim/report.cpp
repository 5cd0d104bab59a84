#include "watermpc/sim/report.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace watermpc::sim {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

double RunLog::price_flow_correlation() const {
  const int n = steps();
  if (n < 2) return 0.0;
  double mp = 0.0, mu = 0.0;
  for (const auto& r : records) {
    mp += r.price;
    mu += r.u.sum();
  }
  mp /= n;
  mu /= n;
  double spu = 0.0, spp = 0.0, suu = 0.0;
  for (const auto& r : records) {
    const double dp = r.price - mp;
    const double du = r.u.sum() - mu;
    spu += dp * du;
    spp += dp * dp;
    suu += du * du;
  }
  if (spp == 0.0 || suu == 0.0) return 0.0;
  return spu / std::sqrt(spp * suu);
}

double RunLog::volume_balance_error() const {
  const double delta = final_volume - initial_volume;
  const double expected = pumped_volume - demand_volume - exchange_volume;
  const double scale = std::max({demand_volume, pumped_volume, 1.0});
  return std::abs(delta - (expected - clamped_volume)) / scale;
}

void RunLog::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write run log: " + path);
  const int n_tank = records.empty() ? 0 : static_cast<int>(records.front().tank_levels.size());
  const int m = records.empty() ? 0 : static_cast<int>(records.front().u.size());
  out << "t";
  for (int i = 1; i <= n_tank; ++i) out << ",h" << i;
  for (int i = 1; i <= m; ++i) out << ",u" << i;
  out << ",u_total,price,d_real,d_forecast,cost_cum,feasible,fallback\n";
  for (const auto& r : records) {
    out << fmt(r.t);
    for (int i = 0; i < n_tank; ++i) out << "," << fmt(r.tank_levels[i]);
    for (int i = 0; i < m; ++i) out << "," << fmt(r.u[i]);
    out << "," << fmt(r.u.sum()) << "," << fmt(r.price) << "," << fmt(r.d_real)
        << "," << fmt(r.d_forecast) << "," << fmt(r.cost_cum) << ","
        << (r.feasible ? 1 : 0) << "," << r.fallback << "\n";
  }
}

RunLog RunLog::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open run log: " + path);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error(path + ": empty run log");

  // Infer tank and pump counts from the header layout.
  int n_tank = 0, m = 0;
  {
    std::stringstream ss(header);
    std::string col;
    while (std::getline(ss, col, ',')) {
      if (col.size() > 1 && col[0] == 'h' && std::isdigit(col[1])) ++n_tank;
      if (col.size() > 1 && col[0] == 'u' && std::isdigit(col[1])) ++m;
    }
  }

  RunLog log;
  std::string line;
  double prev_cum = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    auto next = [&]() {
      if (!std::getline(ss, cell, ',')) {
        throw std::runtime_error(path + ": short record");
      }
      return std::stod(cell);
    };
    RunRecord r;
    r.t = next();
    r.tank_levels.resize(n_tank);
    for (int i = 0; i < n_tank; ++i) r.tank_levels[i] = next();
    r.u.resize(m);
    for (int i = 0; i < m; ++i) r.u[i] = next();
    next();  // u_total, redundant with u
    r.price = next();
    r.d_real = next();
    r.d_forecast = next();
    r.cost_cum = next();
    r.feasible = next() != 0.0;
    r.fallback = static_cast<int>(next());
    r.step_cost = r.cost_cum - prev_cum;
    prev_cum = r.cost_cum;
    r.state = r.tank_levels;  // aggregation unavailable offline
    if (r.fallback == 1) ++log.fallback_count;
    if (r.fallback == 2) ++log.degraded_count;
    log.records.push_back(std::move(r));
  }
  log.total_cost = prev_cum;
  return log;
}

std::string RunLog::summary_json() const {
  json doc;
  doc["steps"] = steps();
  doc["total_cost"] = total_cost;
  doc["violations"] = violation_count;
  doc["fallbacks"] = fallback_count;
  doc["degraded"] = degraded_count;
  doc["price_flow_correlation"] = price_flow_correlation();
  doc["volume_balance_error"] = volume_balance_error();
  doc["pumped_volume"] = pumped_volume;
  doc["demand_volume"] = demand_volume;
  return doc.dump(2);
}

void RunLog::save_summary(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write summary: " + path);
  out << summary_json() << "\n";
}

ReportBundle report(const std::vector<std::pair<RunLog, RunLog>>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("report needs at least one run pair");
  for (const auto& [proposed, follower] : pairs) {
    if (proposed.steps() != follower.steps()) {
      throw std::invalid_argument("paired runs have mismatched lengths");
    }
  }
  ReportBundle bundle;
  std::ostringstream table;
  table << "proposed,follower\n";
  json summary;
  summary["pairs"] = json::array();
  for (const auto& [proposed, follower] : pairs) {
    const double ratio = proposed.total_cost / follower.total_cost;
    table << fmt(ratio) << ",1\n";
    json entry;
    entry["relative_cost"] = ratio;
    entry["proposed_cost"] = proposed.total_cost;
    entry["follower_cost"] = follower.total_cost;
    entry["proposed_violations"] = proposed.violation_count;
    entry["follower_violations"] = follower.violation_count;
    entry["proposed_fallbacks"] = proposed.fallback_count;
    entry["proposed_degraded"] = proposed.degraded_count;
    entry["price_flow_correlation"] = proposed.price_flow_correlation();
    summary["pairs"].push_back(std::move(entry));
  }
  bundle.relative_costs_csv = table.str();
  bundle.summary_json = summary.dump(2);
  return bundle;
}

void write_report(const std::vector<std::pair<RunLog, RunLog>>& pairs,
                  const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const ReportBundle bundle = report(pairs);
  {
    std::ofstream out(fs::path(out_dir) / "relative_costs.csv");
    out << bundle.relative_costs_csv;
  }
  {
    std::ofstream out(fs::path(out_dir) / "report_summary.json");
    out << bundle.summary_json << "\n";
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    pairs[i].first.save_csv(
        (fs::path(out_dir) / ("run_" + std::to_string(i) + "_proposed.csv")).string());
    pairs[i].second.save_csv(
        (fs::path(out_dir) / ("run_" + std::to_string(i) + "_follower.csv")).string());
  }
}

}  // namespace watermpc::sim
