#include "watermpc/mpc/config.hpp"

#include <cmath>

namespace watermpc::mpc {

namespace {

long round_to_grid(double value, double grid, const char* what) {
  const double steps = value / grid;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, std::abs(steps))) {
    throw ConfigError(std::string(what) + " is not aligned to the dt grid");
  }
  return static_cast<long>(rounded);
}

}  // namespace

int MpcConfig::steps_per_day() const {
  return static_cast<int>(round_to_grid(t_day, dt, "t_day"));
}

void MpcConfig::apply_barrier_defaults() {
  barrier_a = Eigen::VectorXd::Constant(2 * n(), 80.0);
  barrier_b = Eigen::VectorXd::Constant(2 * n(), 0.3);
}

void MpcConfig::validate() const {
  if (n() <= 0 || m() <= 0) throw ConfigError("state and input dimensions must be positive");
  if (state_upper.size() != n()) throw ConfigError("state bound size mismatch");
  for (int i = 0; i < n(); ++i) {
    if (!(state_lower[i] < state_upper[i])) {
      throw ConfigError("state lower bound must be below upper bound");
    }
  }
  for (int i = 0; i < m(); ++i) {
    if (!(input_upper[i] > 0)) throw ConfigError("input upper bounds must be positive");
  }
  if (barrier_a.size() != 2 * n() || barrier_b.size() != 2 * n()) {
    throw ConfigError("barrier parameter vectors must have 2n entries");
  }
  for (int i = 0; i < barrier_a.size(); ++i) {
    if (barrier_a[i] < 0) throw ConfigError("barrier a must be non-negative (0 disables the term)");
    if (!(barrier_b[i] > 0)) throw ConfigError("barrier b must be positive");
    const int s = i / 2;
    const double half_band = 0.5 * (state_upper[s] - state_lower[s]);
    if (!(barrier_b[i] < half_band)) {
      throw ConfigError("barrier b must stay below half the state band (dangerous regions overlap)");
    }
  }
  if (!(terminal_radius > 0)) throw ConfigError("terminal radius must be positive");
  if (!(dt > 0) || !(t_day > 0)) throw ConfigError("dt and t_day must be positive");
  round_to_grid(t_day, dt, "t_day");
  solver.validate();
}

int horizon_length(double t, double t_day, double dt) {
  if (t < 0) throw ConfigError("time must be non-negative");
  if (!(dt > 0) || !(t_day > 0)) throw ConfigError("dt and t_day must be positive");
  const long steps_per_day = round_to_grid(t_day, dt, "t_day");
  const long k = round_to_grid(t, dt, "t");
  return static_cast<int>(steps_per_day - (k % steps_per_day));
}

}  // namespace watermpc::mpc
