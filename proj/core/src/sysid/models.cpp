#include "watermpc/sysid/models.hpp"

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace watermpc::sysid {

using nlohmann::json;

namespace {

void require_finite(const Eigen::MatrixXd& mat, const char* name) {
  if (!mat.allFinite()) {
    throw ModelError(std::string(name) + " contains non-finite entries");
  }
}

json matrix_to_json(const Eigen::MatrixXd& mat) {
  json rows = json::array();
  for (int i = 0; i < mat.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < mat.cols(); ++j) row.push_back(mat(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, const std::string& name) {
  if (!rows.is_array() || rows.empty()) throw ModelError("matrix " + name + " malformed");
  const int r = static_cast<int>(rows.size());
  const int c = static_cast<int>(rows[0].size());
  Eigen::MatrixXd mat(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows[i].size()) != c) throw ModelError("matrix " + name + " ragged");
    for (int j = 0; j < c; ++j) mat(i, j) = rows[i][j].get<double>();
  }
  return mat;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr, const std::string& name) {
  if (!arr.is_array()) throw ModelError("vector " + name + " malformed");
  Eigen::VectorXd v(static_cast<int>(arr.size()));
  for (int i = 0; i < v.size(); ++i) v[i] = arr[i].get<double>();
  return v;
}

}  // namespace

void LinearDiscreteModel::validate() const {
  if (n <= 0 || m <= 0) throw ModelError("model dimensions must be positive");
  if (A_d.rows() != n || A_d.cols() != n) throw ModelError("A_d dimension mismatch");
  if (B_d1.rows() != n || B_d1.cols() != m) throw ModelError("B_d1 dimension mismatch");
  if (B_d2.rows() != n || B_d2.cols() != 1) throw ModelError("B_d2 dimension mismatch");
  if (!(dt > 0)) throw ModelError("dt must be positive");
  require_finite(A_d, "A_d");
  require_finite(B_d1, "B_d1");
  require_finite(B_d2, "B_d2");
  const double rho = A_d.eigenvalues().cwiseAbs().maxCoeff();
  if (rho > 1.0 + 1e-6) {
    throw ModelError("fitted A_d is explosive (spectral radius " +
                     std::to_string(rho) + ")");
  }
}

void PressureModel::validate() const {
  if (A_p.rows() != B_p.rows() || B_p.rows() != B_p.cols() ||
      p_in.size() != A_p.rows()) {
    throw ModelError("pressure model dimension mismatch");
  }
  require_finite(A_p, "A_p");
  require_finite(B_p, "B_p");
  require_finite(p_in, "p_in");
}

std::string models_to_json(const LinearDiscreteModel& state_model,
                           const PressureModel& pressure_model,
                           const std::vector<std::vector<std::string>>& tank_groups,
                           const Eigen::VectorXd& state_rms_holdout,
                           const Eigen::VectorXd& pressure_rms_holdout) {
  json doc;
  doc["state_model"] = {
      {"n", state_model.n},       {"m", state_model.m},
      {"dt", state_model.dt},     {"A_d", matrix_to_json(state_model.A_d)},
      {"B_d1", matrix_to_json(state_model.B_d1)},
      {"B_d2", matrix_to_json(state_model.B_d2)},
  };
  doc["pressure_model"] = {
      {"A_p", matrix_to_json(pressure_model.A_p)},
      {"B_p", matrix_to_json(pressure_model.B_p)},
      {"p_in", vector_to_json(pressure_model.p_in)},
  };
  doc["aggregation"] = {{"groups", tank_groups}};
  doc["holdout"] = {{"state_rms", vector_to_json(state_rms_holdout)},
                    {"pressure_rms", vector_to_json(pressure_rms_holdout)}};
  return doc.dump(2);
}

void models_from_json_text(const std::string& text, LinearDiscreteModel* state_model,
                           PressureModel* pressure_model,
                           std::vector<std::vector<std::string>>* tank_groups) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("model JSON parse failure: ") + e.what());
  }
  if (state_model) {
    const auto& sm = doc.at("state_model");
    state_model->n = sm.at("n").get<int>();
    state_model->m = sm.at("m").get<int>();
    state_model->dt = sm.at("dt").get<double>();
    state_model->A_d = matrix_from_json(sm.at("A_d"), "A_d");
    state_model->B_d1 = matrix_from_json(sm.at("B_d1"), "B_d1");
    state_model->B_d2 = matrix_from_json(sm.at("B_d2"), "B_d2");
    state_model->validate();
  }
  if (pressure_model) {
    const auto& pm = doc.at("pressure_model");
    pressure_model->A_p = matrix_from_json(pm.at("A_p"), "A_p");
    pressure_model->B_p = matrix_from_json(pm.at("B_p"), "B_p");
    pressure_model->p_in = vector_from_json(pm.at("p_in"), "p_in");
    pressure_model->validate();
  }
  if (tank_groups) {
    *tank_groups = doc.at("aggregation").at("groups")
                       .get<std::vector<std::vector<std::string>>>();
  }
}

void save_models(const std::string& path, const LinearDiscreteModel& state_model,
                 const PressureModel& pressure_model,
                 const std::vector<std::vector<std::string>>& tank_groups,
                 const Eigen::VectorXd& state_rms_holdout,
                 const Eigen::VectorXd& pressure_rms_holdout) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write model file: " + path);
  out << models_to_json(state_model, pressure_model, tank_groups,
                        state_rms_holdout, pressure_rms_holdout)
      << "\n";
}

void load_models(const std::string& path, LinearDiscreteModel* state_model,
                 PressureModel* pressure_model,
                 std::vector<std::vector<std::string>>* tank_groups) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  models_from_json_text(ss.str(), state_model, pressure_model, tank_groups);
}

}  // namespace watermpc::sysid
