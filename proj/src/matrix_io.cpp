#include "platoon/matrix_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "platoon/synthesis.hpp"

namespace platoon {

using nlohmann::json;

std::uint64_t fnv1a64(const void* data, std::size_t bytes, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_matrices(std::initializer_list<const Eigen::MatrixXd*> mats) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto* m : mats) {
    const std::int64_t dims[2] = {m->rows(), m->cols()};
    h = fnv1a64(dims, sizeof(dims), h);
    h = fnv1a64(m->data(), sizeof(double) * m->size(), h);
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, int expect_cols = -1) {
  if (!j.is_array()) throw std::runtime_error("matrix_from_json: expected array of rows");
  const int rows = static_cast<int>(j.size());
  if (rows == 0)
    return Eigen::MatrixXd(0, expect_cols >= 0 ? expect_cols : 0);
  const int cols = static_cast<int>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  return m;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(1) << "\n";
}

}  // namespace

void save_data_batch(const std::string& path, const DataBatch& batch) {
  json j;
  j["kind"] = "data_batch";
  j["T"] = batch.T;
  j["t_s"] = batch.t_s;
  j["design_consistent"] = batch.design_consistent;
  j["U0"] = matrix_to_json(batch.U0);
  j["X0"] = matrix_to_json(batch.X0);
  j["X1"] = matrix_to_json(batch.X1);
  j["Z0"] = matrix_to_json(batch.Z0);
  if (batch.W0.size() > 0) j["W0"] = matrix_to_json(batch.W0);
  j["hash"] = hash_matrices({&batch.U0, &batch.Z0, &batch.X1});
  write_json(path, j);
}

DataBatch load_data_batch(const std::string& path) {
  const json j = load_json(path);
  if (j.value("kind", "") != "data_batch")
    throw std::runtime_error("load_data_batch: not a data batch file: " + path);
  DataBatch b;
  b.T = j.at("T").get<int>();
  b.t_s = j.at("t_s").get<double>();
  b.design_consistent = j.at("design_consistent").get<bool>();
  b.U0 = matrix_from_json(j.at("U0"), b.T);
  b.X0 = matrix_from_json(j.at("X0"), b.T);
  b.X1 = matrix_from_json(j.at("X1"), b.T);
  b.Z0 = matrix_from_json(j.at("Z0"), b.T);
  if (j.contains("W0")) b.W0 = matrix_from_json(j.at("W0"), b.T);
  b.validate();
  return b;
}

void save_synthesis_result(const std::string& path, const SynthesisResult& result,
                           std::uint64_t seed) {
  json j;
  j["kind"] = "synthesis_result";
  j["status"] = to_string(result.status);
  j["message"] = result.message;
  j["K"] = matrix_to_json(result.K);
  j["P"] = matrix_to_json(result.P);
  j["Y"] = matrix_to_json(result.Y);
  j["G2"] = matrix_to_json(result.G2);
  j["gamma"] = result.gamma;
  j["eta"] = result.eta;
  j["eps1"] = result.eps1;
  j["eps2"] = result.eps2;
  j["lambda1"] = result.lambda1;
  j["lambda2"] = result.lambda2;
  j["delta"] = result.delta;
  j["dims"] = {{"n_u", result.K.rows()},
               {"n_z", result.K.cols()},
               {"n_x", result.P.rows()},
               {"T", result.Y.rows()}};
  j["residuals"] = {{"interp", result.r_interp}, {"gain", result.r_gain},
                    {"y", result.r_y},           {"g2", result.r_g2},
                    {"null", result.r_null},     {"lmi_min_eig", result.lmi_min_eig},
                    {"p_min_eig", result.p_min_eig}};
  j["cond_P"] = result.cond_P;
  j["iterations"] = result.iterations;
  j["solve_seconds"] = result.solve_seconds;
  j["data_hash"] = result.data_hash;
  j["seed"] = seed;
  write_json(path, j);
}

SynthesisResult load_synthesis_result(const std::string& path) {
  const json j = load_json(path);
  if (j.value("kind", "") != "synthesis_result")
    throw std::runtime_error("load_synthesis_result: not a synthesis result: " + path);
  SynthesisResult r;
  const std::string status = j.at("status").get<std::string>();
  r.status = status == "optimal"          ? SolveStatus::Optimal
             : status == "almost_optimal" ? SolveStatus::AlmostOptimal
             : status == "infeasible"     ? SolveStatus::Infeasible
             : status == "iteration_limit" ? SolveStatus::IterationLimit
                                           : SolveStatus::NumericalFailure;
  r.message = j.value("message", "");
  r.K = matrix_from_json(j.at("K"));
  r.P = matrix_from_json(j.at("P"));
  r.Y = matrix_from_json(j.at("Y"));
  r.G2 = matrix_from_json(j.at("G2"), 0);
  r.gamma = j.at("gamma").get<double>();
  r.eta = j.value("eta", 0.0);
  r.eps1 = j.value("eps1", 0.0);
  r.eps2 = j.value("eps2", 0.0);
  r.lambda1 = j.value("lambda1", 0.0);
  r.lambda2 = j.value("lambda2", 0.0);
  r.delta = j.value("delta", 0.0);
  r.data_hash = j.value("data_hash", "");
  r.solve_seconds = j.value("solve_seconds", 0.0);
  return r;
}

void save_controller_bundle(const std::string& path, const ControllerBundle& bundle) {
  json j;
  j["kind"] = "controller_bundle";
  j["t_s"] = bundle.t_s;
  j["n_vehicles"] = bundle.n_vehicles;
  j["n_av"] = bundle.n_av;
  json subs = json::array();
  for (const auto& s : bundle.subs) {
    json js;
    js["begin"] = s.begin;
    js["end"] = s.end;
    js["K"] = matrix_to_json(s.K);
    js["u_slots"] = s.u_slots;
    js["layout"] = {{"n", s.layout.n},
                    {"n_x", s.layout.n_x},
                    {"n_u", s.layout.n_u},
                    {"n_w", s.layout.n_w},
                    {"n_z", s.layout.n_z},
                    {"av_indices", s.layout.av_indices},
                    {"monomial_offset", s.layout.monomial_offset}};
    subs.push_back(std::move(js));
  }
  j["subs"] = std::move(subs);
  write_json(path, j);
}

ControllerBundle load_controller_bundle(const std::string& path) {
  const json j = load_json(path);
  if (j.value("kind", "") != "controller_bundle")
    throw std::runtime_error("load_controller_bundle: not a controller bundle: " + path);
  ControllerBundle b;
  b.t_s = j.at("t_s").get<double>();
  b.n_vehicles = j.at("n_vehicles").get<int>();
  b.n_av = j.at("n_av").get<int>();
  for (const auto& js : j.at("subs")) {
    SubGain s;
    s.begin = js.at("begin").get<int>();
    s.end = js.at("end").get<int>();
    s.K = matrix_from_json(js.at("K"));
    s.u_slots = js.at("u_slots").get<std::vector<int>>();
    const auto& jl = js.at("layout");
    s.layout.n = jl.at("n").get<int>();
    s.layout.n_x = jl.at("n_x").get<int>();
    s.layout.n_u = jl.at("n_u").get<int>();
    s.layout.n_w = jl.at("n_w").get<int>();
    s.layout.n_z = jl.at("n_z").get<int>();
    s.layout.av_indices = jl.at("av_indices").get<std::vector<int>>();
    s.layout.monomial_offset = jl.at("monomial_offset").get<std::vector<int>>();
    b.subs.push_back(std::move(s));
  }
  b.validate();
  return b;
}

}  // namespace platoon
