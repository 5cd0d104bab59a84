#include "watermpc/hydro/steady_state.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <queue>
#include <vector>

namespace watermpc::hydro {

namespace {
constexpr double kFlowExponent = 1.852;
}

double headloss(double resistance, double flow) {
  if (!(resistance > 0.0) || !std::isfinite(flow)) {
    throw std::invalid_argument("headloss: K must be positive and q finite");
  }
  return resistance * flow * std::pow(std::abs(flow), kFlowExponent - 1.0);
}

double headloss_derivative(double resistance, double flow, double q_eps) {
  if (!(resistance > 0.0)) {
    throw std::invalid_argument("headloss_derivative: K must be positive");
  }
  const double q = std::max(std::abs(flow), q_eps);
  return kFlowExponent * resistance * std::pow(q, kFlowExponent - 1.0);
}

double flow_from_headloss(double resistance, double head_drop) {
  const double mag = std::pow(std::abs(head_drop) / resistance, 1.0 / kFlowExponent);
  return head_drop >= 0.0 ? mag : -mag;
}

namespace {

struct LinkRefs {
  // Pipe endpoints as global node indices.
  std::vector<int> from, to;
};

void check_reachability(const NetworkTopology& net, const LinkRefs& links) {
  const int n = net.node_count();
  const int n_junc = net.junction_count();
  std::vector<std::vector<int>> adj(n);
  for (std::size_t p = 0; p < net.pipes.size(); ++p) {
    adj[links.from[p]].push_back(links.to[p]);
    adj[links.to[p]].push_back(links.from[p]);
  }
  std::vector<char> seen(n, 0);
  std::queue<int> bfs;
  for (int v = n_junc; v < n; ++v) {  // tanks and reservoirs are fixed-head
    seen[v] = 1;
    bfs.push(v);
  }
  while (!bfs.empty()) {
    const int v = bfs.front();
    bfs.pop();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        bfs.push(w);
      }
    }
  }
  for (int j = 0; j < n_junc; ++j) {
    if (!seen[j]) {
      throw DisconnectedDemand("junction '" + net.junctions[j].id +
                               "' is not reachable from any fixed-head node");
    }
  }
}

}  // namespace

SteadyStateResult solve_steady_state(const NetworkTopology& topology,
                                     const Eigen::VectorXd& tank_levels,
                                     const Eigen::VectorXd& pump_flows,
                                     const Eigen::VectorXd& junction_demands,
                                     const SolveOptions& options) {
  const int n_junc = topology.junction_count();
  const int n_pipe = static_cast<int>(topology.pipes.size());
  const int n_pump = topology.pump_count();
  if (tank_levels.size() != topology.tank_count()) throw std::invalid_argument("tank level vector size mismatch");
  if (pump_flows.size() != n_pump) throw std::invalid_argument("pump flow vector size mismatch");
  if (junction_demands.size() != n_junc) throw std::invalid_argument("demand vector size mismatch");
  for (int i = 0; i < junction_demands.size(); ++i) {
    if (!(junction_demands[i] >= 0.0) || !std::isfinite(junction_demands[i])) {
      throw std::invalid_argument("demands must be finite and non-negative");
    }
  }
  for (int i = 0; i < n_pump; ++i) {
    if (!std::isfinite(pump_flows[i]) || pump_flows[i] < -1e-12 ||
        pump_flows[i] > topology.pumps[i].max_flow * (1.0 + 1e-9)) {
      throw std::invalid_argument("pump flow outside [0, max_flow]");
    }
  }

  LinkRefs links;
  links.from.resize(n_pipe);
  links.to.resize(n_pipe);
  for (int p = 0; p < n_pipe; ++p) {
    links.from[p] = topology.node_index(topology.pipes[p].from);
    links.to[p] = topology.node_index(topology.pipes[p].to);
  }
  check_reachability(topology, links);

  // Net external inflow at each junction: pumps minus demand.
  Eigen::VectorXd external = Eigen::VectorXd::Zero(n_junc);
  for (int j = 0; j < n_junc; ++j) external[j] -= junction_demands[j];
  for (int i = 0; i < n_pump; ++i) {
    const int node = topology.node_index(topology.pumps[i].to);
    if (node < n_junc) external[node] += pump_flows[i];
  }

  // Head vector over all nodes; fixed-head entries never change.
  Eigen::VectorXd head(topology.node_count());
  for (int v = 0; v < topology.node_count(); ++v) {
    head[v] = v < n_junc ? 0.0 : topology.fixed_head(v, tank_levels);
  }
  // Initialize junction heads at the mean fixed head.
  double mean_fixed = 0.0;
  for (int v = n_junc; v < topology.node_count(); ++v) mean_fixed += head[v];
  mean_fixed /= std::max(1, topology.node_count() - n_junc);
  for (int j = 0; j < n_junc; ++j) head[j] = mean_fixed;

  Eigen::VectorXd q = Eigen::VectorXd::Ones(n_pipe);  // deterministic start

  auto exact_residual = [&](const Eigen::VectorXd& h, Eigen::VectorXd* flows_out) {
    Eigen::VectorXd res = external;
    for (int p = 0; p < n_pipe; ++p) {
      const double drop = h[links.from[p]] - h[links.to[p]];
      const double qe = flow_from_headloss(topology.pipes[p].resistance, drop);
      if (flows_out) (*flows_out)[p] = qe;
      if (links.to[p] < n_junc) res[links.to[p]] += qe;
      if (links.from[p] < n_junc) res[links.from[p]] -= qe;
    }
    return res;
  };

  Eigen::VectorXd exact_flows(n_pipe);
  double residual_norm = exact_residual(head, &exact_flows).lpNorm<Eigen::Infinity>();

  SteadyStateResult result;
  bool converged = n_junc == 0 || residual_norm <= options.tolerance;
  int iterations = 0;

  while (!converged && iterations < options.max_iterations) {
    ++iterations;
    // Linearize each pipe about its current flow iterate.
    Eigen::VectorXd w(n_pipe), y(n_pipe);
    for (int p = 0; p < n_pipe; ++p) {
      const double K = topology.pipes[p].resistance;
      const double dh = headloss_derivative(K, q[p], options.q_eps);
      w[p] = 1.0 / dh;
      y[p] = q[p] - headloss(K, q[p]) * w[p];
    }

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_junc, n_junc);
    Eigen::VectorXd b = external;
    for (int p = 0; p < n_pipe; ++p) {
      const int a = links.from[p];
      const int c = links.to[p];
      const bool a_j = a < n_junc, c_j = c < n_junc;
      if (a_j) A(a, a) += w[p];
      if (c_j) A(c, c) += w[p];
      if (a_j && c_j) {
        A(a, c) -= w[p];
        A(c, a) -= w[p];
      }
      // Move the linearization constants and fixed heads to the rhs.
      if (c_j) {
        b[c] += y[p];
        if (!a_j) b[c] += w[p] * head[a];
      }
      if (a_j) {
        b[a] -= y[p];
        if (!c_j) b[a] += w[p] * head[c];
      }
    }
    // b currently holds external + signed y + fixed-head terms; the system is
    // A * h_junc = b with A the weighted Laplacian restricted to junctions.
    Eigen::VectorXd h_new = A.ldlt().solve(b);
    if (!h_new.allFinite()) {
      throw NonConvergence("linear solve produced non-finite heads", residual_norm);
    }

    // Damped acceptance: halve the head update while the residual grows.
    Eigen::VectorXd h_old = head.head(n_junc);
    Eigen::VectorXd candidate = h_new;
    double cand_norm = 0.0;
    for (int halving = 0; halving <= 30; ++halving) {
      head.head(n_junc) = candidate;
      cand_norm = exact_residual(head, &exact_flows).lpNorm<Eigen::Infinity>();
      if (cand_norm <= residual_norm || halving == 30) break;
      candidate = 0.5 * (candidate + h_old);
    }
    residual_norm = cand_norm;

    // Next linearization point from the accepted heads.
    for (int p = 0; p < n_pipe; ++p) {
      const double drop = head[links.from[p]] - head[links.to[p]];
      q[p] = y[p] + w[p] * drop;
    }
    converged = residual_norm <= options.tolerance;
  }

  if (!converged) {
    throw NonConvergence("hydraulic solve exceeded " +
                             std::to_string(options.max_iterations) +
                             " iterations (residual " +
                             std::to_string(residual_norm) + " m^3/h)",
                         residual_norm);
  }

  result.node_heads = head;
  result.link_flows.resize(topology.link_count());
  exact_residual(head, &exact_flows);
  result.link_flows.head(n_pipe) = exact_flows;
  result.link_flows.tail(n_pump) = pump_flows;
  result.iterations = iterations;
  result.residual = residual_norm;
  return result;
}

Eigen::VectorXd pump_outlet_pressures(const NetworkTopology& topology,
                                      const Eigen::VectorXd& node_heads) {
  Eigen::VectorXd p(topology.pump_count());
  for (int i = 0; i < topology.pump_count(); ++i) {
    p[i] = node_heads[topology.node_index(topology.pumps[i].to)];
  }
  return p;
}

Eigen::VectorXd pump_inlet_pressures(const NetworkTopology& topology) {
  Eigen::VectorXd p(topology.pump_count());
  for (int i = 0; i < topology.pump_count(); ++i) {
    const int node = topology.node_index(topology.pumps[i].from);
    const int r = node - topology.junction_count() - topology.tank_count();
    p[i] = topology.reservoirs[r].head;
  }
  return p;
}

}  // namespace watermpc::hydro
