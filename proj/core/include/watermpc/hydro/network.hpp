#ifndef WATERMPC_HYDRO_NETWORK_HPP
#define WATERMPC_HYDRO_NETWORK_HPP

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace watermpc::hydro {

/// Node/link description of a water distribution network. Node indices are
/// assigned in declaration order: junctions first, then tanks, then
/// reservoirs. Link indices: pipes first, then pumps.
struct NetworkTopology {
  struct Junction {
    std::string id;
    double elevation = 0.0;
    bool demand = false;           // demand attachment flag
    bool controlled_zone = false;  // counted into the aggregated demand d_a
  };
  struct Tank {
    std::string id;
    double area = 0.0;       // cross section, m^2
    double min_level = 0.0;  // m
    double max_level = 0.0;  // m
    double init_level = 0.0; // m
    double elevation = 0.0;  // m; node head = elevation + level
  };
  struct Reservoir {
    std::string id;
    double head = 0.0;  // fixed hydraulic head, m
  };
  struct Pipe {
    std::string from, to;
    double resistance = 0.0;  // K of the head-loss law, per (m^3/h)^1.852
    bool inter_tank = false;  // directly connects two tanks
  };
  struct Pump {
    std::string id;
    std::string from;  // must be a reservoir
    std::string to;
    double max_flow = 0.0;  // m^3/h
  };

  std::vector<Junction> junctions;
  std::vector<Tank> tanks;
  std::vector<Reservoir> reservoirs;
  std::vector<Pipe> pipes;
  std::vector<Pump> pumps;

  int node_count() const {
    return static_cast<int>(junctions.size() + tanks.size() + reservoirs.size());
  }
  int junction_count() const { return static_cast<int>(junctions.size()); }
  int tank_count() const { return static_cast<int>(tanks.size()); }
  int pump_count() const { return static_cast<int>(pumps.size()); }
  int link_count() const { return static_cast<int>(pipes.size() + pumps.size()); }

  /// Global node index for an id; throws on unknown ids.
  int node_index(const std::string& id) const;
  bool is_junction(int node) const { return node < junction_count(); }
  bool is_tank(int node) const {
    return node >= junction_count() && node < junction_count() + tank_count();
  }
  int tank_of_node(int node) const { return node - junction_count(); }
  int node_of_tank(int tank) const { return junction_count() + tank; }

  /// Fixed head of a non-junction node given current tank levels.
  double fixed_head(int node, const Eigen::VectorXd& tank_levels) const;

  Eigen::VectorXd pump_max_flows() const;
  Eigen::VectorXd initial_levels() const;

  /// Checks structural invariants: connectivity, pump sources are reservoirs,
  /// positive resistances and areas, level bounds ordered, at least one pump
  /// and one tank, inter-tank flags only on tank-tank pipes.
  void validate() const;

  static NetworkTopology from_json_text(const std::string& text,
                                        const std::string& origin = "<string>");
  static NetworkTopology load(const std::string& path);

 private:
  mutable std::unordered_map<std::string, int> index_cache_;
  void build_index() const;
};

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace watermpc::hydro

#endif
