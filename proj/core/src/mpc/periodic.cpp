#include "watermpc/mpc/periodic.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace watermpc::mpc {

using nlohmann::json;

double PeriodicTrajectory::periodicity_residual() const {
  return (h_star.col(0) - h_star.col(h_star.cols() - 1)).lpNorm<Eigen::Infinity>();
}

void PeriodicTrajectory::validate(const MpcConfig& config) const {
  if (periodicity_residual() > 1e-6) {
    throw std::runtime_error("periodic trajectory residual exceeds 1e-6");
  }
  const double slack = 2e-6;
  for (int k = 0; k < h_star.cols(); ++k) {
    for (int i = 0; i < config.n(); ++i) {
      if (h_star(i, k) < config.state_lower[i] - slack ||
          h_star(i, k) > config.state_upper[i] + slack) {
        throw std::runtime_error("periodic trajectory violates state bounds");
      }
    }
  }
  for (int k = 0; k < u_star.cols(); ++k) {
    for (int i = 0; i < config.m(); ++i) {
      if (u_star(i, k) < -slack || u_star(i, k) > config.input_upper[i] + slack) {
        throw std::runtime_error("periodic trajectory violates input bounds");
      }
    }
  }
}

PeriodicTrajectory compute_periodic_trajectory(
    const sysid::LinearDiscreteModel& model,
    const sysid::PressureModel& pressure, const Eigen::VectorXd& d_star,
    const Eigen::VectorXd& c_star, const MpcConfig& config) {
  config.validate();
  model.validate();
  const int T = config.steps_per_day();
  if (d_star.size() != T || c_star.size() != T) {
    throw std::invalid_argument("d_star and c_star must have T_day/dt entries");
  }
  const int n = model.n, m = model.m;
  const int dim = n + m * T;

  const AffineTrajectory traj = AffineTrajectory::free_h0(model, d_star);

  opt::SmoothProblem problem;
  problem.dim = dim;
  problem.lower = Eigen::VectorXd::Zero(dim);
  problem.upper.resize(dim);
  problem.lower.head(n) = config.state_lower;
  problem.upper.head(n) = config.state_upper;
  for (int k = 0; k < T; ++k) {
    problem.upper.segment(n + k * m, m) = config.input_upper;
  }

  problem.objective = [&model, &pressure, &config, &d_star, &c_star, n, m,
                       T](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    const Eigen::VectorXd h0 = x.head(n);
    const Eigen::VectorXd u_flat = x.tail(m * T);
    const Eigen::Map<const Eigen::MatrixXd> u_seq(u_flat.data(), m, T);
    const Eigen::MatrixXd h = rollout(model, h0, u_seq, d_star);

    double value = 0.0;
    Eigen::VectorXd adjoint = Eigen::VectorXd::Zero(n);
    if (grad) grad->setZero(x.size());
    for (int j = T - 1; j >= 0; --j) {
      const Eigen::VectorXd u = u_seq.col(j);
      const Eigen::VectorXd hj = h.col(j);
      const Eigen::VectorXd p_out = pressure.A_p * hj + pressure.B_p * u;
      value += c_star[j] * u.dot(p_out - pressure.p_in) +
               barrier_cost(hj, config).value;
      if (grad) {
        grad->segment(n + j * m, m) = c_star[j] * (p_out - pressure.p_in) +
                                      c_star[j] * pressure.B_p.transpose() * u +
                                      model.B_d1.transpose() * adjoint;
        adjoint = c_star[j] * pressure.A_p.transpose() * u +
                  barrier_gradient(hj, config) + model.A_d.transpose() * adjoint;
      }
    }
    if (grad) grad->head(n) = adjoint;
    return value;
  };

  // State boxes along the orbit (h_0 is covered by the decision box).
  for (int s = 1; s <= T; ++s) {
    for (int i = 0; i < n; ++i) {
      const Eigen::RowVectorXd row = traj.sensitivities[s].row(i);
      const double off = traj.offsets(i, s);
      const double lo = config.state_lower[i];
      const double hi = config.state_upper[i];
      problem.inequalities.push_back(
          {[row, off, lo](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
             if (g) *g = -row.transpose();
             return lo - (off + row.dot(x));
           },
           "h_lo[" + std::to_string(s) + "," + std::to_string(i) + "]"});
      problem.inequalities.push_back(
          {[row, off, hi](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
             if (g) *g = row.transpose();
             return (off + row.dot(x)) - hi;
           },
           "h_hi[" + std::to_string(s) + "," + std::to_string(i) + "]"});
    }
  }
  // Periodicity h_T = h_0, one coupling per state.
  for (int i = 0; i < n; ++i) {
    const Eigen::RowVectorXd row = traj.sensitivities[T].row(i);
    const double off = traj.offsets(i, T);
    problem.couplings.push_back(
        {[row, off, i](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
           if (g) {
             *g = row.transpose();
             (*g)[i] -= 1.0;
           }
           return off + row.dot(x) - x[i];
         },
         0.0, "periodicity[" + std::to_string(i) + "]"});
  }

  // Start from mid-band levels and a demand-follower-like constant input.
  Eigen::VectorXd x0(dim);
  x0.head(n) = 0.5 * (config.state_lower + config.state_upper);
  const double mean_demand = d_star.mean();
  const double u_total_cap = config.input_upper.sum();
  for (int k = 0; k < T; ++k) {
    x0.segment(n + k * m, m) = config.input_upper * (mean_demand / u_total_cap);
  }

  const opt::SolverResult res = opt::minimize(problem, x0, config.solver);
  if (res.status == opt::SolveStatus::infeasible ||
      res.max_violation > config.solver.tol_constraint) {
    throw PeriodicInfeasible(
        "no box-feasible periodic orbit found (best residual " +
            std::to_string(res.max_violation) + ")",
        res.max_violation);
  }

  PeriodicTrajectory out;
  const Eigen::VectorXd h0 = res.x.head(n);
  const Eigen::VectorXd u_flat = res.x.tail(m * T);
  out.u_star = Eigen::Map<const Eigen::MatrixXd>(u_flat.data(), m, T);
  out.h_star = rollout(model, h0, out.u_star, d_star);
  // Snap the endpoint mismatch (below coupling tolerance) so the published
  // orbit is exactly periodic for downstream day-boundary reuse.
  out.d_star = d_star;
  out.c_star = c_star;
  out.cost = res.objective;
  out.validate(config);
  return out;
}

namespace {

json matrix_rows(const Eigen::MatrixXd& mat) {
  json rows = json::array();
  for (int i = 0; i < mat.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < mat.cols(); ++j) row.push_back(mat(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r ? static_cast<int>(rows[0].size()) : 0;
  Eigen::MatrixXd mat(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) mat(i, j) = rows[i][j].get<double>();
  return mat;
}

}  // namespace

std::string PeriodicTrajectory::to_json() const {
  json doc;
  doc["h_star"] = matrix_rows(h_star);
  doc["u_star"] = matrix_rows(u_star);
  doc["d_star"] = std::vector<double>(d_star.data(), d_star.data() + d_star.size());
  doc["c_star"] = std::vector<double>(c_star.data(), c_star.data() + c_star.size());
  doc["cost"] = cost;
  return doc.dump(2);
}

PeriodicTrajectory PeriodicTrajectory::from_json_text(const std::string& text) {
  json doc = json::parse(text);
  PeriodicTrajectory out;
  out.h_star = matrix_from(doc.at("h_star"));
  out.u_star = matrix_from(doc.at("u_star"));
  const auto d = doc.at("d_star").get<std::vector<double>>();
  const auto c = doc.at("c_star").get<std::vector<double>>();
  out.d_star = Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<int>(d.size()));
  out.c_star = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<int>(c.size()));
  out.cost = doc.at("cost").get<double>();
  return out;
}

void PeriodicTrajectory::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trajectory file: " + path);
  out << to_json() << "\n";
}

PeriodicTrajectory PeriodicTrajectory::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

}  // namespace watermpc::mpc
