#ifndef WATERMPC_SYSID_DATASET_HPP
#define WATERMPC_SYSID_DATASET_HPP

#include <Eigen/Core>

#include <string>
#include <vector>

namespace watermpc::sysid {

struct DatasetRecord {
  Eigen::VectorXd h;      // model state at k
  Eigen::VectorXd u;      // pump flows at k
  double d_a = 0.0;       // aggregated demand at k
  Eigen::VectorXd h_next; // model state at k+1
  Eigen::VectorXd p_out;  // pump outlet pressures at k
};

struct Dataset {
  std::vector<DatasetRecord> records;
  std::vector<int> episode_offsets;  // first record index of each episode
  double dt = 1.0;
  int n = 0;
  int m = 0;

  int size() const { return static_cast<int>(records.size()); }
  int episode_count() const { return static_cast<int>(episode_offsets.size()); }

  /// Requires consistent dimensions and at least 10*(n+m+1) records.
  void validate() const;

  /// Splits off the trailing `fraction` of episodes for validation.
  std::pair<Dataset, Dataset> split_holdout(double fraction) const;

  /// CSV persistence, header h_1..h_n,u_1..u_m,d_a,hnext_1..hnext_n,pout_1..pout_m.
  void save_csv(const std::string& path) const;
  static Dataset load_csv(const std::string& path, int n, int m, double dt);
};

}  // namespace watermpc::sysid

#endif
