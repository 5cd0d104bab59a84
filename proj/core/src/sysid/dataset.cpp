#include "watermpc/sysid/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace watermpc::sysid {

void Dataset::validate() const {
  if (n <= 0 || m <= 0) throw std::invalid_argument("dataset dimensions must be positive");
  if (!(dt > 0)) throw std::invalid_argument("dataset dt must be positive");
  const int min_records = 10 * (n + m + 1);
  if (size() < min_records) {
    throw std::invalid_argument("dataset needs at least " +
                                std::to_string(min_records) + " records, has " +
                                std::to_string(size()));
  }
  for (const auto& r : records) {
    if (r.h.size() != n || r.h_next.size() != n || r.u.size() != m ||
        r.p_out.size() != m) {
      throw std::invalid_argument("dataset record dimension mismatch");
    }
    if (!r.h.allFinite() || !r.h_next.allFinite() || !r.u.allFinite() ||
        !r.p_out.allFinite() || !std::isfinite(r.d_a)) {
      throw std::invalid_argument("dataset record has non-finite values");
    }
  }
}

std::pair<Dataset, Dataset> Dataset::split_holdout(double fraction) const {
  if (fraction < 0.0 || fraction >= 1.0) throw std::invalid_argument("holdout fraction outside [0,1)");
  Dataset train, hold;
  train.dt = hold.dt = dt;
  train.n = hold.n = n;
  train.m = hold.m = m;
  const int n_ep = episode_count();
  const int hold_eps = static_cast<int>(n_ep * fraction);
  const int split_ep = n_ep - hold_eps;
  for (int e = 0; e < n_ep; ++e) {
    const int begin = episode_offsets[e];
    const int end = e + 1 < n_ep ? episode_offsets[e + 1] : size();
    Dataset& dst = e < split_ep ? train : hold;
    dst.episode_offsets.push_back(dst.size());
    for (int k = begin; k < end; ++k) dst.records.push_back(records[k]);
  }
  return {std::move(train), std::move(hold)};
}

void Dataset::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  for (int i = 1; i <= n; ++i) out << "h_" << i << ",";
  for (int i = 1; i <= m; ++i) out << "u_" << i << ",";
  out << "d_a";
  for (int i = 1; i <= n; ++i) out << ",hnext_" << i;
  for (int i = 1; i <= m; ++i) out << ",pout_" << i;
  out << "\n";
  char buf[32];
  auto put = [&](double v, bool lead_comma) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    if (lead_comma) out << ",";
    out << buf;
  };
  for (const auto& r : records) {
    for (int i = 0; i < n; ++i) put(r.h[i], i > 0);
    for (int i = 0; i < m; ++i) put(r.u[i], true);
    put(r.d_a, true);
    for (int i = 0; i < n; ++i) put(r.h_next[i], true);
    for (int i = 0; i < m; ++i) put(r.p_out[i], true);
    out << "\n";
  }
}

Dataset Dataset::load_csv(const std::string& path, int n, int m, double dt) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  Dataset ds;
  ds.n = n;
  ds.m = m;
  ds.dt = dt;
  std::string line;
  std::getline(in, line);  // header
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    DatasetRecord r;
    r.h.resize(n);
    r.u.resize(m);
    r.h_next.resize(n);
    r.p_out.resize(m);
    std::string cell;
    auto next = [&](double* v) {
      if (!std::getline(ss, cell, ',')) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": short record");
      }
      *v = std::stod(cell);
    };
    for (int i = 0; i < n; ++i) next(&r.h[i]);
    for (int i = 0; i < m; ++i) next(&r.u[i]);
    next(&r.d_a);
    for (int i = 0; i < n; ++i) next(&r.h_next[i]);
    for (int i = 0; i < m; ++i) next(&r.p_out[i]);
    ds.records.push_back(std::move(r));
  }
  ds.episode_offsets.push_back(0);
  return ds;
}

}  // namespace watermpc::sysid
