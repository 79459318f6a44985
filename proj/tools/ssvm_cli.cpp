// Command-line front end: simulate -> fit -> grid -> roc -> export workflows
// over the library, with JSON run configs and plot-ready CSV outputs.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "ssvm/ssvm.hpp"

namespace fs = std::filesystem;
using namespace ssvm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitDiverged = 4;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> regularizer;
  std::optional<std::string> loss;
  std::optional<double> lambda;
  std::optional<double> gamma;
  std::optional<double> epsilon;
  std::optional<int> max_iters;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Run configuration JSON");
  cmd->add_option("--out", opts.out_dir, "Output directory");
  cmd->add_option("--seed", opts.seed, "Override simulation/grid seed");
  cmd->add_option("--threads", opts.threads, "Parallelism cap (default SSVM_THREADS or cores)");
  cmd->add_option("--regularizer", opts.regularizer, "lasso|enet|graphnet|flasso");
  cmd->add_option("--loss", opts.loss, "hinge|tls|huber:<delta>");
  cmd->add_option("--lambda", opts.lambda, "Sparsity weight");
  cmd->add_option("--gamma", opts.gamma, "Second regularization weight");
  cmd->add_option("--epsilon", opts.epsilon, "Relative-change stopping tolerance");
  cmd->add_option("--max-iters", opts.max_iters, "Iteration cap");
}

RunConfig load_config(const CommonOpts& opts) {
  RunConfig config;
  if (!opts.config_path.empty()) {
    config = run_config_from_json(read_json(opts.config_path));
  } else {
    config.grid = default_grid(config.solver.regularizer);
  }
  if (opts.regularizer) {
    config.solver.regularizer = regularizer_from_name(*opts.regularizer);
    if (opts.config_path.empty() || config.grid.lambdas.empty())
      config.grid = default_grid(config.solver.regularizer);
  }
  if (opts.loss) config.solver.loss = loss_from_name(*opts.loss);
  if (opts.lambda) config.solver.lambda = *opts.lambda;
  if (opts.gamma) config.solver.gamma = *opts.gamma;
  if (opts.epsilon) config.solver.epsilon = *opts.epsilon;
  if (opts.max_iters) config.solver.max_iters = *opts.max_iters;
  if (opts.seed) {
    config.sim.seed = *opts.seed;
    config.grid.seed = *opts.seed;
    config.solver.seed = *opts.seed;
  }
  if (opts.threads) config.threads = *opts.threads;
  validate(config.solver);
  return config;
}

fs::path ensure_out_dir(const CommonOpts& opts) {
  fs::path dir(opts.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());
  return dir;
}

std::string hash_of(const RunConfig& config) { return config_hash(run_config_to_json(config)); }

/// Parcellation used by fit/grid/export: explicit file, else the default
/// slice when the feature count matches it.
GridParcellation resolve_parcellation(const std::string& path, Index p) {
  if (!path.empty()) {
    GridParcellation parc = parcellation_from_json(read_json(path));
    if (parc.edge_count() != p)
      throw StructuralError("parcellation edge count does not match data");
    return parc;
  }
  GridParcellation slice = slice66_parcellation();
  if (slice.edge_count() != p)
    throw StructuralError(
        "cannot infer parcellation for feature count " + std::to_string(p) +
        "; pass --parcellation");
  return slice;
}

int cmd_simulate(const CommonOpts& opts, std::optional<int> n_control,
                 std::optional<int> n_patient) {
  RunConfig config = load_config(opts);
  if (n_control) config.n_train_control = *n_control;
  if (n_patient) config.n_train_patient = *n_patient;
  const fs::path dir = ensure_out_dir(opts);
  const std::string hash = hash_of(config);

  const LabeledDataset train =
      generate_dataset(config.sim, config.n_train_control, config.n_train_patient);
  SimulationParams test_params = config.sim;
  test_params.seed = config.sim.seed ^ 0x7e57c0f3ull;  // test cohort draws its own streams
  const LabeledDataset test =
      generate_dataset(test_params, config.n_test_control, config.n_test_patient);

  write_dataset_csv(dir / "train.csv", train.data, hash);
  write_dataset_csv(dir / "test.csv", test.data, hash);
  write_json(dir / "truth.json", truth_sidecar_json(config.sim, train.truth, hash));
  write_json(dir / "parcellation.json", parcellation_to_json(config.sim.parc));
  std::cout << "wrote " << (dir / "train.csv").string() << " (" << train.data.X.rows()
            << " rows), " << (dir / "test.csv").string() << " (" << test.data.X.rows()
            << " rows)\n";
  return kExitOk;
}

int cmd_fit(const CommonOpts& opts, const std::string& data_path,
            const std::string& parcellation_path) {
  RunConfig config = load_config(opts);
  const fs::path dir = ensure_out_dir(opts);
  const DatasetFile dataset = read_dataset_csv(data_path);
  if (!dataset.labeled) throw StructuralError("fit needs a labeled dataset");

  Model model;
  if (is_structured(config.solver.regularizer)) {
    const GridParcellation parc = resolve_parcellation(parcellation_path, dataset.data.X.cols());
    const AugmentationMap map = build_augmentation(parc);
    const SpectralKernel kernel = build_kernel(parc);
    model = fit_structured(dataset.data, parc, map, kernel, config.solver);
  } else {
    model = fit_elasticnet(dataset.data, config.solver);
  }
  write_json(dir / "model.json", model_to_json(model, hash_of(config)));
  std::cout << "fit: " << regularizer_name(model.config.regularizer) << " iterations="
            << model.iterations_run << " converged=" << (model.converged ? "yes" : "no")
            << " nnz=" << model.nnz << "\n";
  return kExitOk;
}

int cmd_predict(const CommonOpts& opts, const std::string& model_path,
                const std::string& data_path) {
  const fs::path dir = ensure_out_dir(opts);
  const Model model = model_from_json(read_json(model_path));
  const DatasetFile dataset = read_dataset_csv(data_path);
  if (dataset.data.X.cols() != model.w.size())
    throw StructuralError("dataset feature count does not match model");

  auto out = std::ofstream(dir / "predictions.csv");
  if (!out) throw IoError("cannot open predictions.csv for writing");
  out << "row,decision_value,label\n";
  Index correct = 0;
  for (Index i = 0; i < dataset.data.X.rows(); ++i) {
    const double value = model.w.dot(dataset.data.X.row(i));
    const int label = value >= 0.0 ? +1 : -1;
    out << i << ',' << fmt_double(value) << ',' << label << "\n";
    if (dataset.labeled && label == (dataset.data.y[i] > 0 ? +1 : -1)) ++correct;
  }
  if (dataset.labeled && dataset.data.X.rows() > 0)
    std::cout << "accuracy=" << fmt_double(static_cast<double>(correct) /
                                           static_cast<double>(dataset.data.X.rows()))
              << "\n";
  return kExitOk;
}

int cmd_grid(const CommonOpts& opts, const std::string& data_path,
             const std::string& parcellation_path, std::optional<double> nnz_budget) {
  RunConfig config = load_config(opts);
  const fs::path dir = ensure_out_dir(opts);
  const DatasetFile dataset = read_dataset_csv(data_path);
  if (!dataset.labeled) throw StructuralError("grid search needs a labeled dataset");
  const std::string hash = hash_of(config);

  GridResult result;
  if (is_structured(config.solver.regularizer)) {
    const GridParcellation parc = resolve_parcellation(parcellation_path, dataset.data.X.cols());
    const AugmentationMap map = build_augmentation(parc);
    const SpectralKernel kernel = build_kernel(parc);
    result = grid_search(dataset.data, &parc, &map, &kernel, config.grid, config.solver,
                         config.threads);
  } else {
    result = grid_search(dataset.data, nullptr, nullptr, nullptr, config.grid, config.solver,
                         config.threads);
  }

  write_grid_csv(dir / "grid_accuracy.csv", result, result.accuracy, hash);
  write_grid_csv(dir / "grid_nnz.csv", result, result.mean_nnz, hash);
  Json best;
  best["tool_version"] = kVersion;
  best["config_hash"] = hash;
  best["best_lambda"] = result.best_lambda;
  best["best_gamma"] = result.best_gamma;
  best["best_accuracy"] = result.accuracy(result.best_lambda_index, result.best_gamma_index);
  best["best_mean_nnz"] = result.mean_nnz(result.best_lambda_index, result.best_gamma_index);
  if (nnz_budget) {
    if (const auto cell = best_cell_within_budget(result, *nnz_budget)) {
      best["budget_lambda"] = result.lambdas[cell->first];
      best["budget_gamma"] = result.gammas[cell->second];
      best["budget_accuracy"] = result.accuracy(cell->first, cell->second);
      best["budget_mean_nnz"] = result.mean_nnz(cell->first, cell->second);
    }
  }
  write_json(dir / "grid_best.json", best);
  std::cout << "grid: best lambda=" << fmt_double(result.best_lambda)
            << " gamma=" << fmt_double(result.best_gamma) << " cv_accuracy="
            << fmt_double(result.accuracy(result.best_lambda_index, result.best_gamma_index))
            << "\n";
  return kExitOk;
}

int cmd_roc(const CommonOpts& opts, const std::string& model_path,
            const std::string& weights_path, const std::string& truth_path) {
  const fs::path dir = ensure_out_dir(opts);
  Vector w;
  std::string hash = "none";
  if (!model_path.empty()) {
    const Json j = read_json(model_path);
    const Model model = model_from_json(j);
    w = model.w;
    hash = j.value("config_hash", hash);
  } else if (!weights_path.empty()) {
    const DatasetFile file = read_dataset_csv(weights_path);
    if (file.data.X.rows() != 1)
      throw StructuralError("weights CSV must hold exactly one row");
    w = file.data.X.row(0).transpose();
  } else {
    throw StructuralError("roc needs --model or --weights");
  }
  const auto truth = truth_from_sidecar(read_json(truth_path));
  const RocCurve curve = roc_edge_recovery(w, truth);
  write_roc_csv(dir / "roc.csv", curve, hash);
  Json auc;
  auc["tool_version"] = kVersion;
  auc["config_hash"] = hash;
  auc["auc"] = curve.auc;
  write_json(dir / "auc.json", auc);
  std::cout << "auc=" << fmt_double(curve.auc) << "\n";
  return kExitOk;
}

int cmd_export(const CommonOpts& opts, const std::string& model_path,
               const std::string& parcellation_path) {
  const fs::path dir = ensure_out_dir(opts);
  const Json j = read_json(model_path);
  const Model model = model_from_json(j);
  const std::string hash = j.value("config_hash", std::string("none"));
  const GridParcellation parc = resolve_parcellation(parcellation_path, model.w.size());

  write_matrix_csv(dir / "weight_matrix.csv", matricize(model.w), hash);
  const auto degree = node_degree(model.w, parc);
  auto out = std::ofstream(dir / "node_degree.csv");
  if (!out) throw IoError("cannot open node_degree.csv for writing");
  out << "# tool=" << kToolName << " " << kVersion << " config_hash=" << hash << "\n";
  out << "node,x,y,z,degree\n";
  for (std::size_t node = 0; node < degree.size(); ++node) {
    const auto coords = parc.cell_coords(parc.cell_of_node(static_cast<int>(node)));
    out << node << ',' << coords[0] << ',' << coords[1] << ',' << coords[2] << ','
        << degree[node] << "\n";
  }
  std::cout << "exported weight matrix (" << model.w.size() << " coordinates)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structured sparse SVM over grid connectomes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);

  CommonOpts opts;
  std::string data_path, model_path, weights_path, truth_path, parcellation_path;
  std::optional<int> n_control, n_patient;
  std::optional<double> nnz_budget;

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic cohort");
  add_common(simulate, opts);
  simulate->add_option("--n-control", n_control, "Training control count");
  simulate->add_option("--n-patient", n_patient, "Training patient count");

  auto* fit = app.add_subcommand("fit", "Train a model on a labeled CSV");
  add_common(fit, opts);
  fit->add_option("--data", data_path, "Labeled dataset CSV")->required();
  fit->add_option("--parcellation", parcellation_path, "Parcellation JSON");

  auto* predict = app.add_subcommand("predict", "Score a dataset with a model");
  add_common(predict, opts);
  predict->add_option("--model", model_path, "Model JSON")->required();
  predict->add_option("--data", data_path, "Dataset CSV")->required();

  auto* grid = app.add_subcommand("grid", "Cross-validated grid search");
  add_common(grid, opts);
  grid->add_option("--data", data_path, "Labeled dataset CSV")->required();
  grid->add_option("--parcellation", parcellation_path, "Parcellation JSON");
  grid->add_option("--nnz-budget", nnz_budget, "Also report best cell within this feature budget");

  auto* roc = app.add_subcommand("roc", "Edge-recovery ROC against a truth sidecar");
  add_common(roc, opts);
  roc->add_option("--model", model_path, "Model JSON");
  roc->add_option("--weights", weights_path, "Single-row weights CSV");
  roc->add_option("--truth", truth_path, "Truth sidecar JSON")->required();

  auto* exp = app.add_subcommand("export", "Weight matrix and node degrees as CSV");
  add_common(exp, opts);
  exp->add_option("--model", model_path, "Model JSON")->required();
  exp->add_option("--parcellation", parcellation_path, "Parcellation JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(opts, n_control, n_patient);
    if (fit->parsed()) return cmd_fit(opts, data_path, parcellation_path);
    if (predict->parsed()) return cmd_predict(opts, model_path, data_path);
    if (grid->parsed()) return cmd_grid(opts, data_path, parcellation_path, nnz_budget);
    if (roc->parsed()) return cmd_roc(opts, model_path, weights_path, truth_path);
    if (exp->parsed()) return cmd_export(opts, model_path, parcellation_path);
  } catch (const DivergenceError& err) {
    std::cerr << "numerical divergence: " << err.what() << "\n";
    return kExitDiverged;
  } catch (const NumericalError& err) {
    std::cerr << "numerical error: " << err.what() << "\n";
    return kExitDiverged;
  } catch (const StructuralError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const IoError& err) {
    std::cerr << "i/o error: " << err.what() << "\n";
    return kExitIo;
  } catch (const Json::exception& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
