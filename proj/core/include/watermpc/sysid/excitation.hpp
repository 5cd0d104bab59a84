#ifndef WATERMPC_SYSID_EXCITATION_HPP
#define WATERMPC_SYSID_EXCITATION_HPP

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "watermpc/hydro/network.hpp"
#include "watermpc/hydro/plant.hpp"
#include "watermpc/sysid/aggregation.hpp"
#include "watermpc/sysid/dataset.hpp"

namespace watermpc::sysid {

struct ExcitationEpisode {
  Eigen::VectorXd initial_levels;  // physical tanks
  Eigen::MatrixXd pump_flows;      // m x length, staircase signals
  double demand_scale = 1.0;       // applied to the base demand profile
};

/// Seeded excitation design: staircase pump sequences covering [0, max_flow],
/// initial levels covering the interior of the allowed band, demand scales in
/// [0.7, 1.3]. Deterministic for a given seed.
std::vector<ExcitationEpisode> generate_excitation(
    const hydro::NetworkTopology& topology, std::uint64_t seed, int episodes,
    int episode_length);

struct CollectOptions {
  double dt = 1.0;
  hydro::StepOptions step;
  double max_dropped_fraction = 0.1;
};

struct CollectStats {
  int episodes_run = 0;
  int episodes_dropped = 0;
};

/// Runs each excitation episode against the hydraulic plant and records
/// (h_k, u_k, d_a_k, h_{k+1}, p_out_k) transitions. `base_demands` holds one
/// profile per junction (columns = junctions in topology order, rows = steps,
/// cycled); the aggregated demand sums the controlled-zone junctions.
/// Episodes aborted by NonConvergence are dropped; throws when more than
/// `max_dropped_fraction` of them drop.
Dataset collect_dataset(const hydro::NetworkTopology& topology,
                        const TankAggregation& aggregation,
                        const std::vector<ExcitationEpisode>& episodes,
                        const Eigen::MatrixXd& base_demands,
                        const CollectOptions& options = {},
                        CollectStats* stats = nullptr);

}  // namespace watermpc::sysid

#endif
