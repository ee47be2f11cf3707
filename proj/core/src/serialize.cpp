#include "blindcal/serialize.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "blindcal/errors.hpp"
#include "blindcal/rng.hpp"

namespace blindcal {

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double x = v[i];
    /* JSON has no representation for non-finite values */
    arr.push_back(std::isfinite(x) ? x : std::copysign(1e308, x));
  }
  return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw IoError("expected a JSON array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& x : j) v[i++] = x.get<double>();
  return v;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& a) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) arr.push_back(a(r, c));
  return arr;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows,
                                 Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows * cols)
    throw IoError("matrix array has wrong length");
  Eigen::MatrixXd a(rows, cols);
  Eigen::Index i = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) a(r, c) = j[i++].get<double>();
  return a;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open: " + path.string());
  nlohmann::json j;
  try {
    file >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

void write_json_file(const nlohmann::json& j,
                     const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open for writing: " + path.string());
  file << j.dump(2) << '\n';
  if (!file) throw IoError("write failed: " + path.string());
}

template <typename T>
T require(const nlohmann::json& j, const char* key) {
  if (!j.contains(key))
    throw IoError(std::string("missing JSON field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad JSON field '") + key + "': " + e.what());
  }
}

}  // namespace

nlohmann::json instance_to_json(const ProblemInstance& inst, bool compact) {
  nlohmann::json j;
  j["dims"] = {{"n", inst.dims.n},
               {"m", inst.dims.m},
               {"p", inst.dims.p},
               {"k", inst.dims.k}};
  j["rho"] = inst.rho;
  j["seed"] = inst.seed;
  j["compact"] = compact;
  if (!compact) {
    j["signal"] = vector_to_json(inst.truth_signal);
    j["gains"] = vector_to_json(inst.truth_gains);
    auto mats = nlohmann::json::array();
    for (const auto& a : inst.ensemble.matrices) mats.push_back(matrix_to_json(a));
    j["matrices"] = mats;
    auto snaps = nlohmann::json::array();
    for (const auto& y : inst.snapshots) snaps.push_back(vector_to_json(y));
    j["snapshots"] = snaps;
  }
  return j;
}

ProblemInstance instance_from_json(const nlohmann::json& j) {
  const auto dims_json = j.contains("dims") ? j.at("dims") : nlohmann::json{};
  Dimensions dims;
  dims.n = require<Eigen::Index>(dims_json, "n");
  dims.m = require<Eigen::Index>(dims_json, "m");
  dims.p = require<Eigen::Index>(dims_json, "p");
  dims.k = require<Eigen::Index>(dims_json, "k");
  dims.validate();
  const double rho = require<double>(j, "rho");
  const auto seed = require<std::uint64_t>(j, "seed");
  const bool compact = j.value("compact", false);

  if (compact) return generate_instance(dims, rho, seed);

  ProblemInstance inst;
  inst.dims = dims;
  inst.rho = rho;
  inst.seed = seed;
  inst.truth_signal = vector_from_json(j.at("signal"));
  inst.truth_gains = vector_from_json(j.at("gains"));
  if (inst.truth_signal.size() != dims.n || inst.truth_gains.size() != dims.m)
    throw IoError("instance arrays do not match dims");
  const auto& mats = j.at("matrices");
  if (!mats.is_array() || static_cast<Eigen::Index>(mats.size()) != dims.p)
    throw IoError("instance has wrong matrix count");
  inst.ensemble.seed = derive_seed(seed, kEnsembleStream);
  for (const auto& mj : mats)
    inst.ensemble.matrices.push_back(matrix_from_json(mj, dims.m, dims.n));
  const auto& snaps = j.at("snapshots");
  if (!snaps.is_array() || static_cast<Eigen::Index>(snaps.size()) != dims.p)
    throw IoError("instance has wrong snapshot count");
  for (const auto& sj : snaps) {
    auto y = vector_from_json(sj);
    if (y.size() != dims.m) throw IoError("snapshot has wrong length");
    inst.snapshots.push_back(std::move(y));
  }
  return inst;
}

void save_instance(const ProblemInstance& inst,
                   const std::filesystem::path& path, bool compact) {
  write_json_file(instance_to_json(inst, compact), path);
}

ProblemInstance load_instance(const std::filesystem::path& path) {
  return instance_from_json(read_json_file(path));
}

nlohmann::json result_to_json(const SolverResult& result) {
  nlohmann::json j;
  j["x_hat"] = vector_to_json(result.x_hat);
  j["g_hat"] = vector_to_json(result.g_hat);
  j["iterations"] = result.iterations;
  j["termination"] = to_string(result.termination);
  auto trace = nlohmann::json::array();
  const auto finite = [](double v) {
    return std::isfinite(v) ? v : std::copysign(1e308, v);
  };
  for (const auto& t : result.trace)
    trace.push_back({{"loss", finite(t.loss)},
                     {"signal_rel_change", finite(t.signal_rel_change)},
                     {"gain_rel_change", finite(t.gain_rel_change)},
                     {"mu_signal", finite(t.mu_signal)},
                     {"mu_gain", finite(t.mu_gain)}});
  j["trace"] = trace;
  return j;
}

SolverResult result_from_json(const nlohmann::json& j) {
  SolverResult result;
  result.x_hat = vector_from_json(j.at("x_hat"));
  result.g_hat = vector_from_json(j.at("g_hat"));
  result.iterations = require<int>(j, "iterations");
  const auto term = require<std::string>(j, "termination");
  if (term == "converged")
    result.termination = Termination::converged;
  else if (term == "max_iters")
    result.termination = Termination::max_iters;
  else
    throw IoError("unknown termination '" + term + "'");
  for (const auto& t : j.value("trace", nlohmann::json::array()))
    result.trace.push_back({require<double>(t, "loss"),
                            require<double>(t, "signal_rel_change"),
                            require<double>(t, "gain_rel_change"),
                            require<double>(t, "mu_signal"),
                            require<double>(t, "mu_gain")});
  return result;
}

void save_result(const SolverResult& result,
                 const std::filesystem::path& path) {
  write_json_file(result_to_json(result), path);
}

SolverResult load_result(const std::filesystem::path& path) {
  return result_from_json(read_json_file(path));
}

nlohmann::json phase_spec_to_json(const PhaseGridSpec& spec) {
  nlohmann::json j;
  j["n_values"] = spec.n_values;
  j["k_values"] = spec.k_values;
  j["m_over_k_exponents"] = spec.m_over_k_exponents;
  j["p_exponents"] = spec.p_exponents;
  j["rho"] = spec.rho;
  j["trials"] = spec.trials;
  j["zeta_db"] = spec.zeta_db;
  j["master_seed"] = spec.master_seed;
  return j;
}

PhaseGridSpec phase_spec_from_json(const nlohmann::json& j) {
  PhaseGridSpec spec;
  spec.n_values = require<std::vector<Eigen::Index>>(j, "n_values");
  spec.k_values = require<std::vector<Eigen::Index>>(j, "k_values");
  spec.m_over_k_exponents =
      require<std::vector<double>>(j, "m_over_k_exponents");
  spec.p_exponents = require<std::vector<double>>(j, "p_exponents");
  spec.rho = j.value("rho", 0.5);
  spec.trials = j.value("trials", 1);
  spec.zeta_db = j.value("zeta_db", -60.0);
  spec.master_seed = j.value("master_seed", std::uint64_t{0});
  spec.validate();
  return spec;
}

PhaseGridSpec load_phase_spec(const std::filesystem::path& path) {
  return phase_spec_from_json(read_json_file(path));
}

}  // namespace blindcal
