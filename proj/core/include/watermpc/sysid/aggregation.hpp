#ifndef WATERMPC_SYSID_AGGREGATION_HPP
#define WATERMPC_SYSID_AGGREGATION_HPP

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

#include "watermpc/hydro/network.hpp"

namespace watermpc::sysid {

class AggregationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maps physical tank levels onto the reduced model state: tanks joined by an
/// inter-tank pipe collapse into one state carrying their area-weighted mean
/// level and summed area; lone tanks map through unchanged.
class TankAggregation {
 public:
  static TankAggregation build(const hydro::NetworkTopology& topology);

  int state_count() const { return static_cast<int>(groups_.size()); }
  const std::vector<std::vector<int>>& groups() const { return groups_; }
  std::vector<std::vector<std::string>> group_ids(const hydro::NetworkTopology&) const;
  const Eigen::VectorXd& group_areas() const { return areas_; }

  /// Physical levels -> model state (area-weighted mean per group). Throws
  /// AggregationError when levels within a group spread more than
  /// `max_spread` (the near-equal-levels assumption is violated).
  Eigen::VectorXd to_model(const Eigen::VectorXd& tank_levels,
                           double max_spread = 0.1) const;

  /// Model state -> physical levels (every group member gets the group level).
  Eigen::VectorXd to_physical(const Eigen::VectorXd& state) const;

  /// Conservative state bounds: tightest member bound per group.
  Eigen::VectorXd state_lower(const hydro::NetworkTopology&) const;
  Eigen::VectorXd state_upper(const hydro::NetworkTopology&) const;

 private:
  std::vector<std::vector<int>> groups_;  // physical tank indices per state
  Eigen::VectorXd areas_;                 // summed group areas
  Eigen::VectorXd tank_areas_;            // per physical tank
  int tank_count_ = 0;
};

inline TankAggregation aggregate_tanks(const hydro::NetworkTopology& topology) {
  return TankAggregation::build(topology);
}

}  // namespace watermpc::sysid

#endif
