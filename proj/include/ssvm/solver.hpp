#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <vector>

#include "ssvm/augmentation.hpp"
#include "ssvm/grid.hpp"
#include "ssvm/losses.hpp"
#include "ssvm/spectral.hpp"

namespace ssvm {

enum class Regularizer { Lasso, ElasticNet, GraphNet, FusedLasso };

inline bool is_structured(Regularizer r) {
  return r == Regularizer::GraphNet || r == Regularizer::FusedLasso;
}

inline int penalty_exponent(Regularizer r) { return r == Regularizer::FusedLasso ? 1 : 2; }

/// Entries of w at or below this magnitude count as zero for sparsity.
inline constexpr double kSparsityTol = 1e-8;
/// Any iterate block whose max magnitude passes this bound aborts the fit.
inline constexpr double kDivergenceLimit = 1e12;

struct SolverConfig {
  Regularizer regularizer = Regularizer::FusedLasso;
  double lambda = 0.0;
  double gamma = 0.0;
  double rho = 1.0;
  Loss loss;
  double epsilon = 4e-3;
  int max_iters = 400;
  std::uint64_t seed = 0;
};

inline void validate(const SolverConfig& cfg) {
  if (cfg.lambda < 0.0 || cfg.gamma < 0.0) throw StructuralError("lambda and gamma must be >= 0");
  if (!(cfg.rho > 0.0)) throw StructuralError("rho must be > 0");
  if (!(cfg.epsilon > 0.0)) throw StructuralError("epsilon must be > 0");
  if (cfg.max_iters < 1) throw StructuralError("max_iters must be >= 1");
  validate(cfg.loss);
}

/// Labeled design matrix; rows of X are feature vectors, y in {-1, +1}.
struct TrainingSet {
  Matrix X;
  Vector y;
};

struct Model {
  Vector w;
  SolverConfig config;
  int iterations_run = 0;
  std::vector<double> objective_trace;
  bool converged = false;
  Index nnz = 0;
  /// Final split-constraint gaps, in the order the constraints are written:
  /// margins vs v_a, w vs v_b, differences vs v_c, padded w vs v_d.
  std::array<double, 4> constraint_gaps{};
};

/// H = 1/4 X^T (I + 1/2 X X^T)^{-1}, the inversion-lemma factor that turns the
/// p-by-p solve (X^T X + 2I)^{-1} v into v/2 - H X v.
inline Matrix precompute_h(const Matrix& X) {
  const Index n = X.rows();
  Matrix m = Matrix::Identity(n, n) + 0.5 * (X * X.transpose());
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericalError("precompute_h: factorization of I + XX^T/2 failed");
  return 0.25 * llt.solve(X).transpose();
}

/// Per-design-matrix state shared across fits: the label-scaled design
/// Xy (rows y_i x_i^T), its Gram matrix, and the inversion-lemma factor.
struct DesignCache {
  Matrix Xy;
  Matrix gram;  // Xy Xy^T
  Matrix H;     // precompute_h(Xy); empty unless built for structured fits
};

inline DesignCache make_design_cache(const TrainingSet& data, bool with_h = true) {
  DesignCache cache;
  cache.Xy = data.y.asDiagonal() * data.X;
  cache.gram = cache.Xy * cache.Xy.transpose();
  if (with_h) {
    const Index n = data.X.rows();
    Matrix m = Matrix::Identity(n, n) + 0.5 * cache.gram;
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) throw NumericalError("design cache factorization failed");
    cache.H = 0.25 * llt.solve(cache.Xy).transpose();
  }
  return cache;
}

namespace detail {

inline void check_training_set(const TrainingSet& data) {
  if (data.X.rows() != data.y.size()) throw StructuralError("label count does not match rows of X");
  if (data.X.rows() < 1) throw StructuralError("training set is empty");
  bool pos = false, neg = false;
  for (Index i = 0; i < data.y.size(); ++i) {
    if (data.y[i] != 1.0 && data.y[i] != -1.0) throw StructuralError("labels must be -1 or +1");
    (data.y[i] > 0 ? pos : neg) = true;
  }
  if (!pos || !neg)
    std::fprintf(stderr, "ssvm: warning: training set has a single class; fit is degenerate\n");
}

inline void check_finite_block(const Vector& v, const char* name, int iter) {
  if (!v.allFinite() || v.cwiseAbs().maxCoeff() > kDivergenceLimit)
    throw DivergenceError(std::string("solver diverged in block ") + name, iter);
}

inline Index count_nnz(const Vector& w) {
  Index nnz = 0;
  for (Index j = 0; j < w.size(); ++j)
    if (std::abs(w[j]) > kSparsityTol) ++nnz;
  return nnz;
}

/// Relative-change stopping rule on successive w iterates. The ratio is
/// undefined at a zero iterate, in which case only an exactly zero successor
/// counts as stagnant; the rule is never consulted before the second
/// iteration. The iterate velocity oscillates and can dip below the
/// tolerance for a single step long before the envelope does, so the ratio
/// must stay below eps for kStopPersistence consecutive iterations.
inline constexpr int kStopPersistence = 3;

inline bool stagnant_step(const Vector& w, const Vector& w_prev, double eps) {
  const double prev_norm = w_prev.norm();
  if (prev_norm == 0.0) return w.norm() == 0.0;
  return (w - w_prev).norm() <= eps * prev_norm;
}

}  // namespace detail

/// Regularized empirical-risk objective evaluated at w. The map is required
/// for the structured penalties and ignored otherwise.
inline double objective(const Vector& w, const TrainingSet& data, const SolverConfig& cfg,
                        const AugmentationMap* map = nullptr) {
  const Index n = data.X.rows();
  if (data.X.cols() != w.size()) throw StructuralError("objective: w length mismatch");
  double risk = 0.0;
  const Vector margins = data.y.asDiagonal() * (data.X * w);
  for (Index i = 0; i < n; ++i) risk += loss_value(cfg.loss, margins[i]);
  double obj = risk / static_cast<double>(n) + cfg.lambda * w.lpNorm<1>();
  switch (cfg.regularizer) {
    case Regularizer::Lasso:
      break;
    case Regularizer::ElasticNet:
      obj += 0.5 * cfg.gamma * w.squaredNorm();
      break;
    case Regularizer::GraphNet:
    case Regularizer::FusedLasso: {
      if (map == nullptr) throw StructuralError("objective: structured penalty needs a map");
      const int q = penalty_exponent(cfg.regularizer);
      obj += cfg.gamma / q * spatial_penalty(w, *map, q);
      break;
    }
  }
  return obj;
}

/// ADMM over the splitting {w, v_c} / {v_a, v_b, v_d} with closed-form block
/// updates. The differencing is applied to the padded pair array, where the
/// Laplacian solve reduces to elementwise division in the frequency domain;
/// splitting directly on the raw difference operator would leave a p-by-p
/// solve with no fast transform, which is why the padded route exists.
inline Model fit_structured(const TrainingSet& data, const GridParcellation& parc,
                            const AugmentationMap& map, const SpectralKernel& kernel,
                            const SolverConfig& cfg, const DesignCache* cache = nullptr) {
  validate(cfg);
  detail::check_training_set(data);
  if (!is_structured(cfg.regularizer))
    throw StructuralError("fit_structured expects graphnet or fused_lasso");
  if (data.X.cols() != map.p || map.p != parc.edge_count())
    throw StructuralError("design matrix does not match parcellation");

  const Index n = data.X.rows();
  const Index p = map.p;
  const int q = penalty_exponent(cfg.regularizer);
  // The mask keeps one difference row per unordered neighbor pair while the
  // objective counts both directed terms, so the spatial weight doubles here.
  const double gamma_spatial = 2.0 * cfg.gamma;
  const double rho = cfg.rho;
  const double prox_tau = 1.0 / (static_cast<double>(n) * rho);

  DesignCache local;
  if (cache == nullptr) {
    local = make_design_cache(data, /*with_h=*/true);
    cache = &local;
  }
  if (cache->H.size() == 0) throw StructuralError("fit_structured needs a cache with H");
  const Matrix& Xy = cache->Xy;
  const Matrix& H = cache->H;

  Vector w = Vector::Zero(p), w_prev(p);
  Vector v_a = Vector::Zero(n), u_a = Vector::Zero(n);
  Vector v_b = Vector::Zero(p), u_b = Vector::Zero(p);
  Vector v_c = Vector::Zero(map.e_tilde), u_c = Vector::Zero(map.e_tilde);
  Vector v_d = Vector::Zero(map.p_tilde), u_d = Vector::Zero(map.p_tilde);
  Vector diff_vd = Vector::Zero(map.e_tilde);  // C~ v_d for the current v_d

  Vector rhs(p), margins(n), aw(map.p_tilde), bvec(map.p_tilde), zeta(map.e_tilde),
      penalty_rows(map.e_tilde);
  std::vector<std::complex<double>> fft_work;

  Model model;
  model.config = cfg;
  model.objective_trace.reserve(cfg.max_iters);

  int iter = 0;
  int stagnant_run = 0;
  while (iter < cfg.max_iters) {
    ++iter;
    w_prev = w;

    // w block: (X^T X + 2I)^{-1} rhs through the inversion lemma
    rhs.noalias() = Xy.transpose() * (v_a - u_a);
    rhs += v_b - u_b;
    rhs += adjoint_augment(v_d - u_d, map);
    w.noalias() = 0.5 * rhs - H * (Xy * rhs);

    // v_c block, reading the differences of the previous v_d
    zeta = diff_vd - u_c;
    if (q == 1) {
      const double thr = gamma_spatial / rho;
      for (Index k = 0; k < map.e_tilde; ++k)
        v_c[k] = map.mask[k] ? soft_threshold(zeta[k], thr) : zeta[k];
    } else {
      const double masked_scale = rho / (gamma_spatial + rho);
      for (Index k = 0; k < map.e_tilde; ++k) v_c[k] = map.mask[k] ? masked_scale * zeta[k] : zeta[k];
    }

    // v_a, v_b, v_d blocks
    margins.noalias() = Xy * w;
    for (Index i = 0; i < n; ++i) v_a[i] = loss_prox(cfg.loss, margins[i] + u_a[i], prox_tau);
    const double soft_tau = cfg.lambda / rho;
    for (Index j = 0; j < p; ++j) v_b[j] = soft_threshold(w[j] + u_b[j], soft_tau);
    aw = augment(w, map);
    apply_difference_adjoint(v_c + u_c, map, bvec);
    bvec += aw + u_d;
    solve_laplacian(bvec, kernel, fft_work, v_d);

    // dual ascent
    apply_difference(v_d, map, diff_vd);
    u_a += margins - v_a;
    u_b += w - v_b;
    u_c += v_c - diff_vd;
    u_d += aw - v_d;

    double risk = 0.0;
    for (Index i = 0; i < n; ++i) risk += loss_value(cfg.loss, margins[i]);
    apply_difference(aw, map, penalty_rows);
    const double obj = risk / static_cast<double>(n) + cfg.lambda * w.lpNorm<1>() +
                       cfg.gamma / q * masked_penalty(penalty_rows, map, q);
    model.objective_trace.push_back(obj);
    if (!std::isfinite(obj)) throw DivergenceError("objective became non-finite", iter);
    detail::check_finite_block(w, "w", iter);
    detail::check_finite_block(v_d, "v_d", iter);
    detail::check_finite_block(u_c, "u_c", iter);

    stagnant_run = detail::stagnant_step(w, w_prev, cfg.epsilon) ? stagnant_run + 1 : 0;
    if (iter >= 2 && stagnant_run >= detail::kStopPersistence) {
      model.converged = true;
      break;
    }
  }

  model.constraint_gaps = {(margins - v_a).norm(), (w - v_b).norm(), (diff_vd - v_c).norm(),
                           (aw - v_d).norm()};
  // v_b carries the exact zeros produced by the soft threshold; it coincides
  // with the w block at the fixed point and is the iterate reported as the
  // trained weight vector
  model.w = std::move(v_b);
  model.iterations_run = iter;
  model.nnz = detail::count_nnz(model.w);
  return model;
}

/// Three-block ADMM for the elastic net; lasso is the gamma = 0 special case.
/// The w block solves (rho X^T X + (gamma + rho) I) w = rho * rhs with the
/// inversion lemma against the cached Gram matrix.
inline Model fit_elasticnet(const TrainingSet& data, const SolverConfig& cfg,
                            const DesignCache* cache = nullptr) {
  validate(cfg);
  detail::check_training_set(data);
  if (is_structured(cfg.regularizer))
    throw StructuralError("fit_elasticnet expects lasso or elastic_net");

  const Index n = data.X.rows();
  const Index p = data.X.cols();
  const double gamma = cfg.regularizer == Regularizer::Lasso ? 0.0 : cfg.gamma;
  const double rho = cfg.rho;
  const double diag = gamma + rho;
  const double prox_tau = 1.0 / (static_cast<double>(n) * rho);

  DesignCache local;
  if (cache == nullptr) {
    local = make_design_cache(data, /*with_h=*/false);
    cache = &local;
  }
  const Matrix& Xy = cache->Xy;
  Eigen::LLT<Matrix> llt(Matrix(diag * Matrix::Identity(n, n) + rho * cache->gram));
  if (llt.info() != Eigen::Success)
    throw NumericalError("fit_elasticnet: w-update factorization failed");

  Vector w = Vector::Zero(p), w_prev(p);
  Vector v_a = Vector::Zero(n), u_a = Vector::Zero(n);
  Vector v_b = Vector::Zero(p), u_b = Vector::Zero(p);
  Vector rhs(p), margins(n);

  Model model;
  model.config = cfg;
  model.objective_trace.reserve(cfg.max_iters);

  int iter = 0;
  int stagnant_run = 0;
  while (iter < cfg.max_iters) {
    ++iter;
    w_prev = w;

    rhs.noalias() = Xy.transpose() * (v_a - u_a);
    rhs += v_b - u_b;
    rhs *= rho;
    // (rho Xy^T Xy + diag I)^{-1} rhs = (rhs - rho Xy^T (diag I + rho Xy Xy^T)^{-1} Xy rhs) / diag
    w.noalias() = rhs - rho * (Xy.transpose() * llt.solve(Xy * rhs));
    w /= diag;

    margins.noalias() = Xy * w;
    for (Index i = 0; i < n; ++i) v_a[i] = loss_prox(cfg.loss, margins[i] + u_a[i], prox_tau);
    const double soft_tau = cfg.lambda / rho;
    for (Index j = 0; j < p; ++j) v_b[j] = soft_threshold(w[j] + u_b[j], soft_tau);

    u_a += margins - v_a;
    u_b += w - v_b;

    double risk = 0.0;
    for (Index i = 0; i < n; ++i) risk += loss_value(cfg.loss, margins[i]);
    const double obj = risk / static_cast<double>(n) + cfg.lambda * w.lpNorm<1>() +
                       0.5 * gamma * w.squaredNorm();
    model.objective_trace.push_back(obj);
    if (!std::isfinite(obj)) throw DivergenceError("objective became non-finite", iter);
    detail::check_finite_block(w, "w", iter);
    detail::check_finite_block(u_a, "u_a", iter);

    stagnant_run = detail::stagnant_step(w, w_prev, cfg.epsilon) ? stagnant_run + 1 : 0;
    if (iter >= 2 && stagnant_run >= detail::kStopPersistence) {
      model.converged = true;
      break;
    }
  }

  model.constraint_gaps = {(margins - v_a).norm(), (w - v_b).norm(), 0.0, 0.0};
  model.w = std::move(v_b);  // the exactly sparse iterate, equal to w at the fixed point
  model.iterations_run = iter;
  model.nnz = detail::count_nnz(model.w);
  return model;
}

/// Dispatch on the configured regularizer. The parcellation trio may be null
/// for lasso and elastic net.
inline Model fit(const TrainingSet& data, const GridParcellation* parc, const AugmentationMap* map,
                 const SpectralKernel* kernel, const SolverConfig& cfg,
                 const DesignCache* cache = nullptr) {
  if (is_structured(cfg.regularizer)) {
    if (parc == nullptr || map == nullptr || kernel == nullptr)
      throw StructuralError("structured fit needs parcellation, map, and kernel");
    return fit_structured(data, *parc, *map, *kernel, cfg, cache);
  }
  return fit_elasticnet(data, cfg, cache);
}

inline double decision_value(const Model& model, const Vector& x) {
  if (x.size() != model.w.size()) throw StructuralError("decision_value: length mismatch");
  return model.w.dot(x);
}

/// Sign of the decision value, with sign(0) = +1.
inline int predict(const Model& model, const Vector& x) {
  return decision_value(model, x) >= 0.0 ? +1 : -1;
}

}  // namespace ssvm
