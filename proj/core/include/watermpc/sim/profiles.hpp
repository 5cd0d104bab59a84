#ifndef WATERMPC_SIM_PROFILES_HPP
#define WATERMPC_SIM_PROFILES_HPP

#include <Eigen/Core>

#include <cstdint>

namespace watermpc::sim {

struct DemandRealization {
  Eigen::VectorXd realized;  // the base profile, cycled over the run
  Eigen::VectorXd forecast;  // smoothly perturbed copy used by the controller
};

/// The plant consumes the base demand unchanged; the controller sees a
/// seeded smooth deviation (low-order Fourier basis) of bounded relative
/// amplitude: max|forecast - base| <= amplitude * max(base), forecast >= 0.
DemandRealization synth_demand(const Eigen::VectorXd& base_daily,
                               std::uint64_t seed, double amplitude,
                               int days = 1);

}  // namespace watermpc::sim

#endif
