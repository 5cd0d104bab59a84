#ifndef WATERMPC_HYDRO_STEADY_STATE_HPP
#define WATERMPC_HYDRO_STEADY_STATE_HPP

#include <Eigen/Core>

#include <stdexcept>
#include <string>

#include "watermpc/hydro/network.hpp"

namespace watermpc::hydro {

/// Hazen-Williams head loss K*q*|q|^0.852, odd in q.
double headloss(double resistance, double flow);

/// d(headloss)/dq = 1.852*K*|q|^0.852, floored at its value at `q_eps` to keep
/// the Newton linearization bounded through zero flow.
double headloss_derivative(double resistance, double flow, double q_eps = 1e-4);

/// Flow through a pipe given the head drop across it (exact inverse of the
/// head-loss law).
double flow_from_headloss(double resistance, double head_drop);

struct SolveOptions {
  int max_iterations = 100;
  double tolerance = 1e-8;  // infinity norm of nodal balance, m^3/h
  double q_eps = 1e-4;
};

struct SteadyStateResult {
  Eigen::VectorXd node_heads;  // per node, global ordering
  Eigen::VectorXd link_flows;  // pipes then pumps; pipe flow positive from->to
  int iterations = 0;
  double residual = 0.0;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double residual)
      : std::runtime_error(what), residual(residual) {}
  double residual;
};

class DisconnectedDemand : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solves the steady-state hydraulics with junction heads as unknowns. Tanks
/// and reservoirs are fixed-head boundaries (quasi-static). `junction_demands`
/// is indexed like `topology.junctions`; `pump_flows` like `topology.pumps`.
SteadyStateResult solve_steady_state(const NetworkTopology& topology,
                                     const Eigen::VectorXd& tank_levels,
                                     const Eigen::VectorXd& pump_flows,
                                     const Eigen::VectorXd& junction_demands,
                                     const SolveOptions& options = {});

/// Solved head at each pump's outlet node, ordered like the pump list.
Eigen::VectorXd pump_outlet_pressures(const NetworkTopology& topology,
                                      const Eigen::VectorXd& node_heads);

/// Constant inlet pressures: the fixed head of each pump's source reservoir.
Eigen::VectorXd pump_inlet_pressures(const NetworkTopology& topology);

}  // namespace watermpc::hydro

#endif
