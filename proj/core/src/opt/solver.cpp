#include "watermpc/opt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

namespace watermpc::opt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                        const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

struct Multipliers {
  Eigen::VectorXd ineq;  // lambda_i >= 0
  Eigen::VectorXd coup;  // mu_j, signed
};

// Shifted coupling residual: zero inside the tolerance band, signed distance
// to the band edge outside. tolerance == 0 reduces to the raw residual.
double band_residual(double g, double tol) {
  if (g > tol) return g - tol;
  if (g < -tol) return g + tol;
  return 0.0;
}

class Augmented {
 public:
  Augmented(const SmoothProblem& p, const Multipliers& mult, double rho,
            long* eval_counter)
      : p_(p), mult_(mult), rho_(rho), evals_(eval_counter) {}

  // Value and gradient of the augmented Lagrangian. Returns NaN when any
  // callback produces a non-finite value (line search treats it as a reject).
  double eval(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
    ++*evals_;
    if (grad) grad->setZero(x.size());
    Eigen::VectorXd gbuf;
    double value = p_.objective(x, grad ? &gbuf : nullptr);
    if (grad) *grad = gbuf;
    if (!std::isfinite(value)) return std::numeric_limits<double>::quiet_NaN();

    for (std::size_t i = 0; i < p_.inequalities.size(); ++i) {
      double gi = p_.inequalities[i].g(x, grad ? &gbuf : nullptr);
      if (!std::isfinite(gi)) return std::numeric_limits<double>::quiet_NaN();
      const double shifted = mult_.ineq[static_cast<int>(i)] / rho_ + gi;
      if (shifted > 0.0) {
        value += 0.5 * rho_ * shifted * shifted -
                 0.5 * mult_.ineq[static_cast<int>(i)] *
                     mult_.ineq[static_cast<int>(i)] / rho_;
        if (grad) *grad += rho_ * shifted * gbuf;
      } else {
        value -= 0.5 * mult_.ineq[static_cast<int>(i)] *
                 mult_.ineq[static_cast<int>(i)] / rho_;
      }
    }
    for (std::size_t j = 0; j < p_.couplings.size(); ++j) {
      double gj = p_.couplings[j].g(x, grad ? &gbuf : nullptr);
      if (!std::isfinite(gj)) return std::numeric_limits<double>::quiet_NaN();
      const double r = band_residual(gj, p_.couplings[j].tolerance);
      value += mult_.coup[static_cast<int>(j)] * r + 0.5 * rho_ * r * r;
      if (grad && r != 0.0) {
        *grad += (mult_.coup[static_cast<int>(j)] + rho_ * r) * gbuf;
      }
    }
    return value;
  }

 private:
  const SmoothProblem& p_;
  const Multipliers& mult_;
  double rho_;
  long* evals_;
};

struct LbfgsMemory {
  std::deque<Eigen::VectorXd> s, y;
  std::deque<double> rho;
  int capacity = 10;

  void push(const Eigen::VectorXd& si, const Eigen::VectorXd& yi) {
    const double sy = si.dot(yi);
    if (sy <= 1e-12 * si.norm() * yi.norm()) return;  // skip bad curvature
    s.push_back(si);
    y.push_back(yi);
    rho.push_back(1.0 / sy);
    if (static_cast<int>(s.size()) > capacity) {
      s.pop_front();
      y.pop_front();
      rho.pop_front();
    }
  }

  // Two-loop recursion for -H*g, restricted to the free components (`mask`
  // entries of 0 zero out bound-active coordinates).
  Eigen::VectorXd direction(const Eigen::VectorXd& grad,
                            const Eigen::VectorXd& mask) const {
    Eigen::VectorXd q = -grad.cwiseProduct(mask);
    if (s.empty()) return q;
    const int k = static_cast<int>(s.size());
    std::vector<double> alpha(k);
    for (int i = k - 1; i >= 0; --i) {
      alpha[i] = rho[i] * s[i].dot(q);
      q -= alpha[i] * y[i];
    }
    const double gamma = s.back().dot(y.back()) / y.back().squaredNorm();
    q *= gamma;
    for (int i = 0; i < k; ++i) {
      const double beta = rho[i] * y[i].dot(q);
      q += (alpha[i] - beta) * s[i];
    }
    return q.cwiseProduct(mask);
  }

  void clear() {
    s.clear();
    y.clear();
    rho.clear();
  }
};

struct InnerOutcome {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
};

// Projected L-BFGS with backtracking Armijo line search along the projection
// arc. Terminates on the projected-gradient infinity norm.
InnerOutcome minimize_inner(const Augmented& fn, const Eigen::VectorXd& x0,
                            const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                            double pg_tol, const SolverConfig& cfg, int outer,
                            long* evals) {
  InnerOutcome out;
  out.x = project(x0, lo, hi);
  Eigen::VectorXd grad(out.x.size());
  out.value = fn.eval(out.x, &grad);
  if (!std::isfinite(out.value)) {
    throw EvaluationFailure("objective not finite at start point", out.x);
  }
  LbfgsMemory mem;
  mem.capacity = cfg.lbfgs_memory;

  auto projected_gradient_norm = [&](const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& g) {
    return (x - project(x - g, lo, hi)).lpNorm<Eigen::Infinity>();
  };

  for (int it = 0; it < cfg.max_inner; ++it) {
    const double pg = projected_gradient_norm(out.x, grad);
    if (pg <= pg_tol) break;

    // Coordinates pinned at a bound with the gradient pushing outward.
    Eigen::VectorXd mask = Eigen::VectorXd::Ones(out.x.size());
    for (int i = 0; i < out.x.size(); ++i) {
      const bool at_lo = out.x[i] <= lo[i] && grad[i] > 0.0;
      const bool at_hi = out.x[i] >= hi[i] && grad[i] < 0.0;
      if (at_lo || at_hi) mask[i] = 0.0;
    }

    Eigen::VectorXd dir = mem.direction(grad, mask);
    if (dir.dot(grad) >= 0.0) {  // not a descent direction: fall back
      dir = -grad.cwiseProduct(mask);
      mem.clear();
    }
    if (dir.lpNorm<Eigen::Infinity>() == 0.0) break;

    double alpha = 1.0;
    const double slope = grad.dot(dir);
    bool accepted = false;
    Eigen::VectorXd x_new, g_new(out.x.size());
    double f_new = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = project(out.x + alpha * dir, lo, hi);
      f_new = fn.eval(x_new, &g_new);
      // Armijo on the projected step; the projected displacement also bounds
      // the model decrease when bounds clip the direction.
      const double decrease = cfg.armijo_c * alpha * std::min(slope, 0.0);
      if (std::isfinite(f_new) && f_new <= out.value + decrease) {
        accepted = true;
        break;
      }
      alpha *= cfg.backtrack;
      if (alpha * dir.lpNorm<Eigen::Infinity>() < 1e-16) break;
    }
    if (!accepted) break;

    mem.push(x_new - out.x, g_new - grad);
    out.x = x_new;
    out.value = f_new;
    grad = g_new;
    out.iterations = it + 1;
    if (cfg.on_iteration) cfg.on_iteration(outer, it, out.value);
  }
  out.grad = grad;
  (void)evals;
  return out;
}

struct ViolationReport {
  double max_violation = 0.0;
  Eigen::VectorXd ineq_values;
  Eigen::VectorXd coup_values;
};

ViolationReport measure_violation(const SmoothProblem& p,
                                  const Eigen::VectorXd& x) {
  ViolationReport rep;
  rep.ineq_values.resize(static_cast<int>(p.inequalities.size()));
  rep.coup_values.resize(static_cast<int>(p.couplings.size()));
  for (std::size_t i = 0; i < p.inequalities.size(); ++i) {
    const double g = p.inequalities[i].g(x, nullptr);
    rep.ineq_values[static_cast<int>(i)] = g;
    rep.max_violation = std::max(rep.max_violation, g);
  }
  for (std::size_t j = 0; j < p.couplings.size(); ++j) {
    const double g = p.couplings[j].g(x, nullptr);
    rep.coup_values[static_cast<int>(j)] = g;
    rep.max_violation = std::max(
        rep.max_violation, std::abs(band_residual(g, p.couplings[j].tolerance)));
  }
  return rep;
}

SolverResult run_single(const SmoothProblem& problem, const Eigen::VectorXd& x0,
                        const SolverConfig& config) {
  SolverResult result;
  long evals = 0;

  Eigen::VectorXd lo = problem.lower.size() == problem.dim
                           ? problem.lower
                           : Eigen::VectorXd::Constant(problem.dim, -kInf);
  Eigen::VectorXd hi = problem.upper.size() == problem.dim
                           ? problem.upper
                           : Eigen::VectorXd::Constant(problem.dim, kInf);

  Multipliers mult;
  mult.ineq = Eigen::VectorXd::Zero(static_cast<int>(problem.inequalities.size()));
  mult.coup = Eigen::VectorXd::Zero(static_cast<int>(problem.couplings.size()));

  Eigen::VectorXd x = project(x0, lo, hi);
  double rho = config.penalty_initial;
  double prev_violation = kInf;
  double pg_norm = kInf;

  const bool unconstrained =
      problem.inequalities.empty() && problem.couplings.empty();

  for (int outer = 0; outer < config.max_outer; ++outer) {
    result.outer_iterations = outer + 1;
    // Loose inner tolerance early, full accuracy once multipliers settle.
    const double inner_tol =
        unconstrained ? config.tol_gradient
                      : std::max(config.tol_gradient, 1e-2 * std::pow(0.2, outer));
    Augmented fn(problem, mult, rho, &evals);
    InnerOutcome inner =
        minimize_inner(fn, x, lo, hi, inner_tol, config, outer, &evals);
    x = inner.x;
    result.inner_iterations += inner.iterations;
    pg_norm = (x - project(x - inner.grad, lo, hi)).lpNorm<Eigen::Infinity>();

    const ViolationReport rep = measure_violation(problem, x);
    result.max_violation = rep.max_violation;

    if (rep.max_violation <= config.tol_constraint &&
        pg_norm <= config.tol_gradient) {
      result.status = SolveStatus::optimal;
      break;
    }
    if (unconstrained && inner.iterations == 0) break;  // stalled

    // Multiplier updates (first-order).
    for (int i = 0; i < mult.ineq.size(); ++i) {
      mult.ineq[i] = std::max(0.0, mult.ineq[i] + rho * rep.ineq_values[i]);
    }
    for (int j = 0; j < mult.coup.size(); ++j) {
      mult.coup[j] += rho * band_residual(rep.coup_values[j],
                                          problem.couplings[j].tolerance);
    }
    // Grow the penalty unless feasibility improved markedly.
    if (rep.max_violation > 0.25 * prev_violation) {
      rho = std::min(rho * config.penalty_growth, config.penalty_max);
    }
    prev_violation = rep.max_violation;
  }

  result.x = x;
  Eigen::VectorXd unused;
  result.objective = problem.objective(x, nullptr);
  result.function_evaluations = evals;
  if (result.status != SolveStatus::optimal) {
    result.status = result.max_violation > config.tol_constraint
                        ? SolveStatus::infeasible
                        : SolveStatus::max_iter;
    // A stalled but feasible and stationary point still counts as optimal.
    if (result.status == SolveStatus::max_iter &&
        pg_norm <= config.tol_gradient) {
      result.status = SolveStatus::optimal;
    }
  }
  return result;
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::max_iter: return "max-iter";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  if (max_outer <= 0 || max_inner <= 0) throw std::invalid_argument("iteration limits must be positive");
  if (tol_constraint <= 0 || tol_gradient <= 0) throw std::invalid_argument("tolerances must be positive");
  if (penalty_initial <= 0 || penalty_growth <= 1.0) throw std::invalid_argument("penalty schedule invalid");
  if (armijo_c <= 0 || armijo_c >= 1 || backtrack <= 0 || backtrack >= 1) throw std::invalid_argument("line-search parameters invalid");
}

SolverResult minimize(const SmoothProblem& problem, const Eigen::VectorXd& x0,
                      const SolverConfig& config) {
  config.validate();
  if (problem.dim <= 0 || !problem.objective) {
    throw std::invalid_argument("problem has no dimension or objective");
  }
  if (x0.size() != problem.dim) {
    throw std::invalid_argument("x0 dimension mismatch");
  }
  SolverResult best = run_single(problem, x0, config);
  if (best.status == SolveStatus::optimal || config.restart_rounds <= 0) {
    return best;
  }
  // Optional seeded restarts from perturbed projections of x0.
  std::mt19937_64 rng(config.restart_seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int round = 0; round < config.restart_rounds; ++round) {
    Eigen::VectorXd x = x0;
    for (int i = 0; i < x.size(); ++i) {
      const double lo = problem.lower.size() ? problem.lower[i] : -1.0;
      const double hi = problem.upper.size() ? problem.upper[i] : 1.0;
      const double span = std::isfinite(hi - lo) ? (hi - lo) : 2.0;
      x[i] += 0.1 * span * unit(rng);
    }
    SolverResult r = run_single(problem, x, config);
    const bool better =
        (r.status == SolveStatus::optimal && best.status != SolveStatus::optimal) ||
        (r.status == best.status && r.max_violation < best.max_violation);
    if (better) best = r;
    if (best.status == SolveStatus::optimal) break;
  }
  return best;
}

std::pair<bool, double> check_feasible(const SmoothProblem& problem,
                                       const Eigen::VectorXd& x, double tol) {
  double viol = 0.0;
  if (problem.lower.size() == problem.dim) {
    viol = std::max(viol, (problem.lower - x).maxCoeff());
  }
  if (problem.upper.size() == problem.dim) {
    viol = std::max(viol, (x - problem.upper).maxCoeff());
  }
  const ViolationReport rep = measure_violation(problem, x);
  viol = std::max(viol, rep.max_violation);
  viol = std::max(viol, 0.0);
  return {viol <= tol, viol};
}

Eigen::VectorXd finite_difference_gradient(const ScalarFn& f,
                                           const Eigen::VectorXd& x,
                                           double step) {
  if (step <= 0) throw std::invalid_argument("step must be positive");
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (int i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    const double fp = f(xp, nullptr);
    xp[i] = x[i] - h;
    const double fm = f(xp, nullptr);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace watermpc::opt
