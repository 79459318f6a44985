#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "ssvm/rng.hpp"
#include "ssvm/solver.hpp"
#include "ssvm/threads.hpp"

namespace ssvm {

/// Two-dimensional regularization grid plus the cross-validation protocol.
struct GridSpec {
  std::vector<double> lambdas;
  std::vector<double> gammas;
  int folds = 5;
  std::uint64_t seed = 0;
};

inline void validate(const GridSpec& grid) {
  if (grid.lambdas.empty() || grid.gammas.empty()) throw StructuralError("grid must be non-empty");
  if (!std::is_sorted(grid.lambdas.begin(), grid.lambdas.end()) ||
      std::adjacent_find(grid.lambdas.begin(), grid.lambdas.end()) != grid.lambdas.end())
    throw StructuralError("lambda grid must be strictly increasing");
  if (!std::is_sorted(grid.gammas.begin(), grid.gammas.end()) ||
      std::adjacent_find(grid.gammas.begin(), grid.gammas.end()) != grid.gammas.end())
    throw StructuralError("gamma grid must be strictly increasing");
  if (grid.folds < 2) throw StructuralError("cross-validation needs k >= 2");
}

/// Cross-validated accuracy and mean selected-feature count per grid cell.
/// best_* is the accuracy argmax with ties broken toward the sparser model
/// (larger lambda, then larger gamma).
struct GridResult {
  std::vector<double> lambdas;
  std::vector<double> gammas;
  Matrix accuracy;  // lambdas.size() x gammas.size()
  Matrix mean_nnz;
  Index best_lambda_index = 0;
  Index best_gamma_index = 0;
  double best_lambda = 0.0;
  double best_gamma = 0.0;
};

using FoldSplit = std::pair<std::vector<int>, std::vector<int>>;  // (train, validate)

/// Deterministic stratified k-fold partition. Indices of each label class are
/// shuffled under the seed and dealt round-robin, so folds are disjoint,
/// covering, and as label-balanced as the counts allow.
inline std::vector<FoldSplit> kfold_split(int n, int k, const Vector& labels,
                                          std::uint64_t seed) {
  if (labels.size() != n) throw StructuralError("kfold_split: label length mismatch");
  if (k < 2 || k > n) throw StructuralError("kfold_split: need 2 <= k <= n");

  std::map<double, std::vector<int>> by_label;
  for (int i = 0; i < n; ++i) by_label[labels[i]].push_back(i);

  std::vector<std::vector<int>> folds(k);
  Rng rng(seed ^ 0x6b666f6cull);
  int dealt = 0;
  for (auto& [label, idx] : by_label) {
    (void)label;
    for (std::size_t i = idx.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.next_double() * i);
      std::swap(idx[i - 1], idx[j]);
    }
    for (int i : idx) folds[dealt++ % k].push_back(i);
  }

  std::vector<FoldSplit> splits(k);
  for (int f = 0; f < k; ++f) {
    std::sort(folds[f].begin(), folds[f].end());
    splits[f].second = folds[f];
    for (int g = 0; g < k; ++g) {
      if (g == f) continue;
      splits[f].first.insert(splits[f].first.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(splits[f].first.begin(), splits[f].first.end());
  }
  return splits;
}

namespace detail {

inline TrainingSet subset(const TrainingSet& data, const std::vector<int>& rows) {
  TrainingSet out;
  out.X.resize(rows.size(), data.X.cols());
  out.y.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.X.row(r) = data.X.row(rows[r]);
    out.y[r] = data.y[rows[r]];
  }
  return out;
}

}  // namespace detail

/// Fraction of correct sign predictions on a labeled set.
inline double accuracy(const Model& model, const TrainingSet& test) {
  if (test.X.rows() == 0) throw StructuralError("accuracy: empty test set");
  if (test.X.cols() != model.w.size()) throw StructuralError("accuracy: feature mismatch");
  const Vector scores = test.X * model.w;
  Index correct = 0;
  for (Index i = 0; i < test.y.size(); ++i) {
    const int label = scores[i] >= 0.0 ? +1 : -1;
    if (label == (test.y[i] > 0 ? +1 : -1)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.X.rows());
}

/// k-fold cross-validated grid search. Fold design caches are built once and
/// shared across cells; cells evaluate in parallel and land in per-cell slots
/// so the thread count cannot change the result. Solver failures are
/// annotated with their grid cell.
inline GridResult grid_search(const TrainingSet& data, const GridParcellation* parc,
                              const AugmentationMap* map, const SpectralKernel* kernel,
                              const GridSpec& grid, const SolverConfig& proto, int threads = 0) {
  validate(grid);
  const int n = static_cast<int>(data.X.rows());
  const auto splits = kfold_split(n, grid.folds, data.y, grid.seed);
  const bool structured = is_structured(proto.regularizer);
  if (structured && (parc == nullptr || map == nullptr || kernel == nullptr))
    throw StructuralError("structured grid search needs parcellation, map, and kernel");

  struct Fold {
    TrainingSet train, validate;
    DesignCache cache;
  };
  std::vector<Fold> folds(splits.size());
  for (std::size_t f = 0; f < splits.size(); ++f) {
    folds[f].train = detail::subset(data, splits[f].first);
    folds[f].validate = detail::subset(data, splits[f].second);
    folds[f].cache = make_design_cache(folds[f].train, structured);
  }

  const std::size_t n_lambda = grid.lambdas.size();
  const std::size_t n_gamma = grid.gammas.size();
  const std::size_t n_cells = n_lambda * n_gamma;
  std::vector<double> cell_acc(n_cells * folds.size(), 0.0);
  std::vector<double> cell_nnz(n_cells * folds.size(), 0.0);

  parallel_for(n_cells * folds.size(), threads, [&](std::size_t task) {
    const std::size_t cell = task / folds.size();
    const std::size_t f = task % folds.size();
    const std::size_t li = cell / n_gamma;
    const std::size_t gi = cell % n_gamma;
    SolverConfig cfg = proto;
    cfg.lambda = grid.lambdas[li];
    cfg.gamma = grid.gammas[gi];
    try {
      const Model model = fit(folds[f].train, parc, map, kernel, cfg, &folds[f].cache);
      cell_acc[task] = accuracy(model, folds[f].validate);
      cell_nnz[task] = static_cast<double>(model.nnz);
    } catch (const NumericalError& err) {
      throw NumericalError(std::string(err.what()) + " at grid cell lambda=" +
                           std::to_string(cfg.lambda) + " gamma=" + std::to_string(cfg.gamma));
    }
  });

  GridResult result;
  result.lambdas = grid.lambdas;
  result.gammas = grid.gammas;
  result.accuracy.resize(n_lambda, n_gamma);
  result.mean_nnz.resize(n_lambda, n_gamma);
  for (std::size_t li = 0; li < n_lambda; ++li)
    for (std::size_t gi = 0; gi < n_gamma; ++gi) {
      const std::size_t cell = li * n_gamma + gi;
      double acc = 0.0, nnz = 0.0;
      for (std::size_t f = 0; f < folds.size(); ++f) {
        acc += cell_acc[cell * folds.size() + f];
        nnz += cell_nnz[cell * folds.size() + f];
      }
      result.accuracy(li, gi) = acc / folds.size();
      result.mean_nnz(li, gi) = nnz / folds.size();
    }

  double best = -1.0;
  for (std::size_t li = 0; li < n_lambda; ++li)
    for (std::size_t gi = 0; gi < n_gamma; ++gi)
      if (result.accuracy(li, gi) >= best) {  // later cells have larger lambda/gamma
        best = result.accuracy(li, gi);
        result.best_lambda_index = li;
        result.best_gamma_index = gi;
      }
  result.best_lambda = grid.lambdas[result.best_lambda_index];
  result.best_gamma = grid.gammas[result.best_gamma_index];
  return result;
}

/// Highest-accuracy cell whose mean selected-feature count fits the budget;
/// empty when no cell qualifies.
inline std::optional<std::pair<Index, Index>> best_cell_within_budget(const GridResult& result,
                                                                      double nnz_budget) {
  std::optional<std::pair<Index, Index>> best;
  double best_acc = -1.0;
  for (Index li = 0; li < result.accuracy.rows(); ++li)
    for (Index gi = 0; gi < result.accuracy.cols(); ++gi) {
      if (result.mean_nnz(li, gi) > nnz_budget) continue;
      if (result.accuracy(li, gi) >= best_acc) {
        best_acc = result.accuracy(li, gi);
        best = {li, gi};
      }
    }
  return best;
}

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Recovery ROC of a weight vector against a known support: sweep a threshold
/// down the sorted |w| values and mark edges with |w| >= threshold as
/// recovered. The area uses the trapezoid rule.
inline RocCurve roc_edge_recovery(const Vector& w, const std::vector<std::uint8_t>& truth) {
  if (static_cast<std::size_t>(w.size()) != truth.size())
    throw StructuralError("roc_edge_recovery: length mismatch");
  Index positives = 0;
  for (auto t : truth) positives += t ? 1 : 0;
  if (positives == 0 || positives == w.size())
    throw StructuralError("roc_edge_recovery: degenerate truth support");
  const Index negatives = w.size() - positives;

  std::vector<Index> order(w.size());
  for (Index i = 0; i < w.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double sa = std::abs(w[a]), sb = std::abs(w[b]);
    return sa != sb ? sa > sb : a < b;
  });

  RocCurve curve;
  curve.points.push_back({std::abs(w[order[0]]) + 1.0, 0.0, 0.0});
  Index tp = 0, fp = 0;
  double auc = 0.0;
  double prev_fpr = 0.0, prev_tpr = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double score = std::abs(w[order[i]]);
    while (i < order.size() && std::abs(w[order[i]]) == score) {
      (truth[order[i]] ? tp : fp) += 1;
      ++i;
    }
    const double fpr = static_cast<double>(fp) / static_cast<double>(negatives);
    const double tpr = static_cast<double>(tp) / static_cast<double>(positives);
    curve.points.push_back({score, fpr, tpr});
    auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  curve.auc = auc;
  return curve;
}

/// Elementwise median across fold weight vectors; an even count averages the
/// two central values.
inline Vector median_weight(const std::vector<Vector>& weights) {
  if (weights.empty()) throw StructuralError("median_weight: empty list");
  const Index p = weights.front().size();
  for (const auto& w : weights)
    if (w.size() != p) throw StructuralError("median_weight: length mismatch");
  Vector out(p);
  std::vector<double> column(weights.size());
  for (Index j = 0; j < p; ++j) {
    for (std::size_t f = 0; f < weights.size(); ++f) column[f] = weights[f][j];
    const std::size_t mid = column.size() / 2;
    std::nth_element(column.begin(), column.begin() + mid, column.end());
    if (column.size() % 2 == 1) {
      out[j] = column[mid];
    } else {
      const double upper = column[mid];
      const double lower = *std::max_element(column.begin(), column.begin() + mid);
      out[j] = (lower + upper) / 2.0;
    }
  }
  return out;
}

/// Number of surviving connections per node: edges incident to the node whose
/// weight magnitude exceeds the sparsity tolerance.
inline std::vector<int> node_degree(const Vector& w, const GridParcellation& parc,
                                    double tol = kSparsityTol) {
  if (w.size() != parc.edge_count()) throw StructuralError("node_degree: length mismatch");
  std::vector<int> degree(parc.node_count(), 0);
  Index k = 0;
  const int d = parc.node_count();
  for (int b = 0; b < d; ++b)
    for (int a = b + 1; a < d; ++a, ++k)
      if (std::abs(w[k]) > tol) {
        ++degree[a];
        ++degree[b];
      }
  return degree;
}

}  // namespace ssvm
