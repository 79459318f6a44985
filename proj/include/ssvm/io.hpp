#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssvm/eval.hpp"
#include "ssvm/simulate.hpp"
#include "ssvm/solver.hpp"
#include "ssvm/version.hpp"

namespace ssvm {

using Json = nlohmann::json;

/// Fixed-width round-trippable double formatting shared by all CSV writers.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// FNV-1a hash of a canonical JSON dump; embedded in every output file so a
/// rerun with the same configuration is recognizable byte for byte.
inline std::string config_hash(const Json& config) {
  const std::string dump = config.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

inline void reject_unknown_keys(const Json& obj, const std::vector<std::string>& known,
                                const std::string& where) {
  if (!obj.is_object()) throw StructuralError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw StructuralError("unknown key '" + key + "' in " + where);
  }
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Parcellation files: {"dims": [Nx,Ny,Nz], "support": flat 0/1, "spacing_mm"}
// ---------------------------------------------------------------------------

inline Json parcellation_to_json(const GridParcellation& parc) {
  Json j;
  j["dims"] = {parc.dims()[0], parc.dims()[1], parc.dims()[2]};
  j["support"] = parc.support();
  j["spacing_mm"] = parc.spacing_mm();
  return j;
}

inline GridParcellation parcellation_from_json(const Json& j) {
  detail::reject_unknown_keys(j, {"dims", "support", "spacing_mm"}, "parcellation");
  if (!j.contains("dims") || !j.contains("support"))
    throw StructuralError("parcellation needs dims and support");
  const auto dims = j.at("dims").get<std::vector<int>>();
  if (dims.size() != 3) throw StructuralError("dims must have three entries");
  auto support = j.at("support").get<std::vector<std::uint8_t>>();
  const double spacing = j.value("spacing_mm", 18.0);
  return GridParcellation({dims[0], dims[1], dims[2]}, std::move(support), spacing);
}

// ---------------------------------------------------------------------------
// Dataset CSV: optional leading label column in {-1, +1}, then p features.
// Lines starting with '#' are metadata comments.
// ---------------------------------------------------------------------------

inline void write_dataset_csv(const std::filesystem::path& path, const TrainingSet& data,
                              const std::string& hash) {
  auto out = detail::open_out(path);
  out << "# tool=" << kToolName << " " << kVersion << " config_hash=" << hash << "\n";
  out << "label";
  for (Index j = 0; j < data.X.cols(); ++j) out << ",e" << j;
  out << "\n";
  for (Index i = 0; i < data.X.rows(); ++i) {
    out << (data.y[i] > 0 ? "1" : "-1");
    for (Index j = 0; j < data.X.cols(); ++j) out << ',' << fmt_double(data.X(i, j));
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

struct DatasetFile {
  TrainingSet data;
  bool labeled = false;
};

inline DatasetFile read_dataset_csv(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  std::string line;
  std::vector<std::vector<double>> rows;
  bool labeled = false;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      labeled = line.rfind("label", 0) == 0;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw StructuralError("non-numeric CSV cell in " + path.string());
      row.push_back(v);
    }
    if (!rows.empty() && rows.front().size() != row.size())
      throw StructuralError("ragged CSV rows in " + path.string());
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw StructuralError("missing CSV header in " + path.string());

  DatasetFile out;
  out.labeled = labeled;
  const Index n = static_cast<Index>(rows.size());
  const Index width = n > 0 ? static_cast<Index>(rows.front().size()) : 0;
  const Index p = labeled && width > 0 ? width - 1 : width;
  out.data.X.resize(n, p);
  out.data.y = labeled ? Vector(n) : Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    Index offset = 0;
    if (labeled) {
      const double label = rows[i][0];
      if (label != 1.0 && label != -1.0)
        throw StructuralError("labels must be -1 or +1 in " + path.string());
      out.data.y[i] = label;
      offset = 1;
    }
    for (Index j = 0; j < p; ++j) out.data.X(i, j) = rows[i][offset + j];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Solver config and model JSON
// ---------------------------------------------------------------------------

inline std::string regularizer_name(Regularizer r) {
  switch (r) {
    case Regularizer::Lasso: return "lasso";
    case Regularizer::ElasticNet: return "elastic_net";
    case Regularizer::GraphNet: return "graphnet";
    case Regularizer::FusedLasso: return "fused_lasso";
  }
  return "lasso";
}

inline Regularizer regularizer_from_name(const std::string& name) {
  if (name == "lasso") return Regularizer::Lasso;
  if (name == "enet" || name == "elastic_net") return Regularizer::ElasticNet;
  if (name == "graphnet") return Regularizer::GraphNet;
  if (name == "flasso" || name == "fused_lasso") return Regularizer::FusedLasso;
  throw StructuralError("unknown regularizer '" + name + "'");
}

inline std::string loss_name(const Loss& loss) {
  switch (loss.type) {
    case LossType::Hinge: return "hinge";
    case LossType::TruncatedLs: return "tls";
    case LossType::HuberizedHinge: return "huber:" + fmt_double(loss.delta);
  }
  return "hinge";
}

inline Loss loss_from_name(const std::string& name) {
  if (name == "hinge") return {LossType::Hinge, 0.5};
  if (name == "tls") return {LossType::TruncatedLs, 0.5};
  if (name.rfind("huber", 0) == 0) {
    Loss loss{LossType::HuberizedHinge, 0.5};
    const auto colon = name.find(':');
    if (colon != std::string::npos) loss.delta = std::stod(name.substr(colon + 1));
    validate(loss);
    return loss;
  }
  throw StructuralError("unknown loss '" + name + "'");
}

inline Json solver_config_to_json(const SolverConfig& cfg) {
  Json j;
  j["regularizer"] = regularizer_name(cfg.regularizer);
  j["lambda"] = cfg.lambda;
  j["gamma"] = cfg.gamma;
  j["rho"] = cfg.rho;
  j["loss"] = loss_name(cfg.loss);
  j["epsilon"] = cfg.epsilon;
  j["max_iters"] = cfg.max_iters;
  j["seed"] = cfg.seed;
  return j;
}

inline SolverConfig solver_config_from_json(const Json& j) {
  detail::reject_unknown_keys(
      j, {"regularizer", "lambda", "gamma", "rho", "loss", "epsilon", "max_iters", "seed"},
      "solver config");
  SolverConfig cfg;
  if (j.contains("regularizer")) cfg.regularizer = regularizer_from_name(j.at("regularizer"));
  cfg.lambda = j.value("lambda", cfg.lambda);
  cfg.gamma = j.value("gamma", cfg.gamma);
  cfg.rho = j.value("rho", cfg.rho);
  if (j.contains("loss")) cfg.loss = loss_from_name(j.at("loss"));
  cfg.epsilon = j.value("epsilon", cfg.epsilon);
  cfg.max_iters = j.value("max_iters", cfg.max_iters);
  cfg.seed = j.value("seed", cfg.seed);
  validate(cfg);
  return cfg;
}

inline Json model_to_json(const Model& model, const std::string& hash) {
  Json j;
  j["tool_version"] = kVersion;
  j["config_hash"] = hash;
  j["config"] = solver_config_to_json(model.config);
  j["w"] = std::vector<double>(model.w.data(), model.w.data() + model.w.size());
  j["iterations_run"] = model.iterations_run;
  j["converged"] = model.converged;
  j["nnz"] = model.nnz;
  j["objective_trace"] = model.objective_trace;
  return j;
}

inline Model model_from_json(const Json& j) {
  detail::reject_unknown_keys(j,
                              {"tool_version", "config_hash", "config", "w", "iterations_run",
                               "converged", "nnz", "objective_trace"},
                              "model");
  Model model;
  model.config = solver_config_from_json(j.at("config"));
  const auto w = j.at("w").get<std::vector<double>>();
  model.w = Eigen::Map<const Vector>(w.data(), static_cast<Index>(w.size()));
  model.iterations_run = j.value("iterations_run", 0);
  model.converged = j.value("converged", false);
  model.nnz = j.value("nnz", Index(0));
  if (j.contains("objective_trace"))
    model.objective_trace = j.at("objective_trace").get<std::vector<double>>();
  return model;
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  auto out = detail::open_out(path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

inline Json read_json(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& err) {
    throw StructuralError("invalid JSON in " + path.string() + ": " + err.what());
  }
  return j;
}

// ---------------------------------------------------------------------------
// Simulation params and ground-truth sidecar
// ---------------------------------------------------------------------------

inline Json simulation_params_to_json(const SimulationParams& params) {
  Json j;
  j["parcellation"] = parcellation_to_json(params.parc);
  j["mu"] = std::vector<double>(params.mu.data(), params.mu.data() + params.mu.size());
  j["sigma"] = std::vector<double>(params.sigma.data(), params.sigma.data() + params.sigma.size());
  j["cluster_a"] = params.cluster_a;
  j["cluster_b"] = params.cluster_b;
  j["effect_size"] = params.effect_size;
  j["seed"] = params.seed;
  return j;
}

inline SimulationParams simulation_params_from_json(const Json& j) {
  detail::reject_unknown_keys(
      j, {"parcellation", "mu", "sigma", "cluster_a", "cluster_b", "effect_size", "seed"},
      "simulation params");
  SimulationParams params;
  if (j.contains("parcellation")) params.parc = parcellation_from_json(j.at("parcellation"));
  if (j.contains("mu")) {
    const auto mu = j.at("mu").get<std::vector<double>>();
    params.mu = Eigen::Map<const Vector>(mu.data(), static_cast<Index>(mu.size()));
  }
  if (j.contains("sigma")) {
    const auto sigma = j.at("sigma").get<std::vector<double>>();
    params.sigma = Eigen::Map<const Vector>(sigma.data(), static_cast<Index>(sigma.size()));
  }
  params.cluster_a = j.value("cluster_a", params.cluster_a);
  params.cluster_b = j.value("cluster_b", params.cluster_b);
  params.effect_size = j.value("effect_size", params.effect_size);
  params.seed = j.value("seed", params.seed);
  return params;
}

inline Json truth_sidecar_json(const SimulationParams& params,
                               const std::vector<std::uint8_t>& truth, const std::string& hash) {
  Json j;
  j["tool_version"] = kVersion;
  j["config_hash"] = hash;
  j["params"] = simulation_params_to_json(params);
  std::vector<Index> support;
  for (std::size_t k = 0; k < truth.size(); ++k)
    if (truth[k]) support.push_back(static_cast<Index>(k));
  j["ground_truth_support"] = support;
  j["edge_count"] = truth.size();
  return j;
}

inline std::vector<std::uint8_t> truth_from_sidecar(const Json& j) {
  const auto support = j.at("ground_truth_support").get<std::vector<Index>>();
  const auto p = j.at("edge_count").get<std::size_t>();
  std::vector<std::uint8_t> truth(p, 0);
  for (Index k : support) {
    if (k < 0 || static_cast<std::size_t>(k) >= p)
      throw StructuralError("ground truth index out of range");
    truth[k] = 1;
  }
  return truth;
}

// ---------------------------------------------------------------------------
// Grid and ROC exports
// ---------------------------------------------------------------------------

inline void write_grid_csv(const std::filesystem::path& path, const GridResult& result,
                           const Matrix& matrix, const std::string& hash) {
  auto out = detail::open_out(path);
  out << "# tool=" << kToolName << " " << kVersion << " config_hash=" << hash << "\n";
  out << "lambda";
  for (double g : result.gammas) out << ",gamma=" << fmt_double(g);
  out << "\n";
  for (Index li = 0; li < matrix.rows(); ++li) {
    out << fmt_double(result.lambdas[li]);
    for (Index gi = 0; gi < matrix.cols(); ++gi) out << ',' << fmt_double(matrix(li, gi));
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve,
                          const std::string& hash) {
  auto out = detail::open_out(path);
  out << "# tool=" << kToolName << " " << kVersion << " config_hash=" << hash << "\n";
  out << "threshold,fpr,tpr\n";
  for (const auto& pt : curve.points)
    out << fmt_double(pt.threshold) << ',' << fmt_double(pt.fpr) << ',' << fmt_double(pt.tpr)
        << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

inline void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                             const std::string& hash) {
  auto out = detail::open_out(path);
  out << "# tool=" << kToolName << " " << kVersion << " config_hash=" << hash << "\n";
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << fmt_double(m(i, j));
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Run configuration: one JSON document driving simulate/fit/grid workflows
// ---------------------------------------------------------------------------

struct RunConfig {
  SimulationParams sim = default_simulation();
  int n_train_control = 50;
  int n_train_patient = 50;
  int n_test_control = 250;
  int n_test_patient = 250;
  SolverConfig solver;
  GridSpec grid;
  int threads = 0;
};

inline std::vector<double> log2_range(double from, double to, double step) {
  if (!(step > 0.0) || to < from) throw StructuralError("invalid log2 range");
  std::vector<double> values;
  for (double e = from; e <= to + 1e-9; e += step) values.push_back(std::exp2(e));
  return values;
}

inline std::vector<double> parse_grid_axis(const Json& section, const std::string& list_key,
                                           const std::string& range_key) {
  if (section.contains(list_key)) return section.at(list_key).get<std::vector<double>>();
  if (section.contains(range_key)) {
    const Json& r = section.at(range_key);
    detail::reject_unknown_keys(r, {"from", "to", "step"}, range_key);
    return log2_range(r.at("from").get<double>(), r.at("to").get<double>(),
                      r.value("step", 1.0));
  }
  return {};
}

/// Default grids match the tuning protocol: lambda covers 2^-11 .. 2^-3.5 and
/// gamma 2^-16 .. 2^2 (capped at 2^-5 for fused Lasso, whose accuracy falls
/// off beyond that range).
inline GridSpec default_grid(Regularizer reg) {
  GridSpec grid;
  grid.lambdas = log2_range(-11.0, -3.5, 0.75);
  switch (reg) {
    case Regularizer::Lasso:
      grid.gammas = {0.0};
      break;
    case Regularizer::FusedLasso:
      grid.gammas = log2_range(-16.0, -5.0, 1.5);
      break;
    default:
      grid.gammas = log2_range(-16.0, 2.0, 2.0);
      break;
  }
  return grid;
}

inline RunConfig run_config_from_json(const Json& j) {
  detail::reject_unknown_keys(j, {"simulation", "solver", "grid", "threads"}, "run config");
  RunConfig config;

  if (j.contains("simulation")) {
    const Json& s = j.at("simulation");
    detail::reject_unknown_keys(s,
                                {"parcellation", "mu", "sigma", "cluster_a", "cluster_b",
                                 "effect_size", "seed", "n_train_control", "n_train_patient",
                                 "n_test_control", "n_test_patient"},
                                "simulation");
    Json params = s;
    params.erase("n_train_control");
    params.erase("n_train_patient");
    params.erase("n_test_control");
    params.erase("n_test_patient");
    SimulationParams parsed = simulation_params_from_json(params);
    if (params.contains("mu") != params.contains("sigma"))
      throw StructuralError("mu and sigma must be given together");
    if (parsed.mu.size() == 0) fill_default_profile(parsed);
    if (!params.contains("parcellation") && !params.contains("cluster_a") &&
        !params.contains("cluster_b")) {
      // the shipped clusters belong to the default slice geometry
      const SimulationParams defaults = default_simulation();
      parsed.cluster_a = defaults.cluster_a;
      parsed.cluster_b = defaults.cluster_b;
    }
    config.sim = std::move(parsed);
    config.n_train_control = s.value("n_train_control", config.n_train_control);
    config.n_train_patient = s.value("n_train_patient", config.n_train_patient);
    config.n_test_control = s.value("n_test_control", config.n_test_control);
    config.n_test_patient = s.value("n_test_patient", config.n_test_patient);
  }

  if (j.contains("solver")) config.solver = solver_config_from_json(j.at("solver"));

  if (j.contains("grid")) {
    const Json& g = j.at("grid");
    detail::reject_unknown_keys(
        g, {"lambdas", "lambda_log2", "gammas", "gamma_log2", "folds", "seed"}, "grid");
    GridSpec grid = default_grid(config.solver.regularizer);
    auto lambdas = parse_grid_axis(g, "lambdas", "lambda_log2");
    auto gammas = parse_grid_axis(g, "gammas", "gamma_log2");
    if (!lambdas.empty()) grid.lambdas = std::move(lambdas);
    if (!gammas.empty()) grid.gammas = std::move(gammas);
    grid.folds = g.value("folds", grid.folds);
    grid.seed = g.value("seed", grid.seed);
    config.grid = std::move(grid);
  } else {
    config.grid = default_grid(config.solver.regularizer);
  }

  config.threads = j.value("threads", 0);
  if (config.n_train_control < 0 || config.n_train_patient < 0 || config.n_test_control < 0 ||
      config.n_test_patient < 0)
    throw StructuralError("cohort sizes must be >= 0");
  return config;
}

inline Json run_config_to_json(const RunConfig& config) {
  Json j;
  j["simulation"] = simulation_params_to_json(config.sim);
  j["simulation"]["n_train_control"] = config.n_train_control;
  j["simulation"]["n_train_patient"] = config.n_train_patient;
  j["simulation"]["n_test_control"] = config.n_test_control;
  j["simulation"]["n_test_patient"] = config.n_test_patient;
  j["solver"] = solver_config_to_json(config.solver);
  j["grid"] = Json{{"lambdas", config.grid.lambdas},
                   {"gammas", config.grid.gammas},
                   {"folds", config.grid.folds},
                   {"seed", config.grid.seed}};
  j["threads"] = config.threads;
  return j;
}

}  // namespace ssvm
