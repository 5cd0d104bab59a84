#ifndef WATERMPC_OPT_SOLVER_HPP
#define WATERMPC_OPT_SOLVER_HPP

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace watermpc::opt {

/// Differentiable scalar function. When `grad` is non-null it must be filled
/// with the gradient at `x` (same dimension as `x`).
using ScalarFn =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

/// Inequality constraint g(x) <= 0.
struct Inequality {
  ScalarFn g;
  std::string name;
};

/// Equality-with-tolerance coupling: |g(x)| <= tolerance. A tolerance of zero
/// is a plain equality driven to the solver's constraint tolerance.
struct Coupling {
  ScalarFn g;
  double tolerance = 0.0;
  std::string name;
};

/// Box-constrained smooth problem with general inequalities and couplings.
/// Evaluators must be deterministic and reentrant.
struct SmoothProblem {
  int dim = 0;
  ScalarFn objective;
  Eigen::VectorXd lower;  // elementwise; -inf allowed
  Eigen::VectorXd upper;  // elementwise; +inf allowed
  std::vector<Inequality> inequalities;
  std::vector<Coupling> couplings;
};

enum class SolveStatus { optimal, infeasible, max_iter };

const char* to_string(SolveStatus s);

struct SolverConfig {
  int max_outer = 30;
  int max_inner = 200;
  double tol_constraint = 1e-6;
  double tol_gradient = 1e-6;
  double penalty_initial = 10.0;
  double penalty_growth = 10.0;
  double penalty_max = 1e12;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int lbfgs_memory = 10;
  // Optional seeded restart round when the first pass ends infeasible.
  int restart_rounds = 0;
  std::uint64_t restart_seed = 0;
  // Observer called once per accepted inner iterate with the augmented
  // objective value; used by tests to audit monotone descent.
  std::function<void(int outer, int inner, double augmented_value)> on_iteration;

  void validate() const;
};

struct SolverResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  SolveStatus status = SolveStatus::max_iter;
  double max_violation = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  long function_evaluations = 0;
};

/// Thrown when a callback produces a non-finite value at a point where the
/// solver cannot recover (e.g. the start point).
class EvaluationFailure : public std::runtime_error {
 public:
  EvaluationFailure(const std::string& what, Eigen::VectorXd point)
      : std::runtime_error(what), point(std::move(point)) {}
  Eigen::VectorXd point;
};

/// Augmented-Lagrangian outer loop around a projected quasi-Newton (L-BFGS)
/// inner minimizer. The decision box is kept exact by projection; general
/// inequalities and couplings are handled by multiplier updates.
SolverResult minimize(const SmoothProblem& problem, const Eigen::VectorXd& x0,
                      const SolverConfig& config = {});

/// Re-evaluates every constraint at `x`. Returns (feasible, max violation);
/// interior points report a violation of exactly 0.
std::pair<bool, double> check_feasible(const SmoothProblem& problem,
                                       const Eigen::VectorXd& x,
                                       double tol = 1e-6);

/// Central-difference gradient estimate, one coordinate at a time.
Eigen::VectorXd finite_difference_gradient(const ScalarFn& f,
                                           const Eigen::VectorXd& x,
                                           double step);

}  // namespace watermpc::opt

#endif
