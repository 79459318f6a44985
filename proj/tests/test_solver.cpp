#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "ssvm/solver.hpp"

using namespace ssvm;
using Catch::Approx;

namespace {

struct StructuredSetup {
  GridParcellation parc;
  AugmentationMap map;
  SpectralKernel kernel;

  explicit StructuredSetup(const GridParcellation& p)
      : parc(p), map(build_augmentation(p)), kernel(build_kernel(p)) {}
};

SolverConfig tight_config(Regularizer reg, double lambda, double gamma, LossType loss) {
  SolverConfig cfg;
  cfg.regularizer = reg;
  cfg.lambda = lambda;
  cfg.gamma = gamma;
  cfg.loss = {loss, 0.5};
  cfg.epsilon = 1e-6;
  cfg.max_iters = 5000;
  return cfg;
}

}  // namespace

TEST_CASE("precompute_h realizes the inversion lemma") {
  Rng rng(41);

  SECTION("zero design gives zero H and a halving w-update") {
    const Matrix x = Matrix::Zero(3, 5);
    const Matrix h = precompute_h(x);
    REQUIRE(h.isZero(0.0));
    const Vector v = oracle::random_vector(5, rng);
    const Vector w = 0.5 * v - h * (x * v);
    REQUIRE((w - 0.5 * v).isZero(0.0));
  }

  SECTION("matches the dense inverse on random designs") {
    for (int rep = 0; rep < 20; ++rep) {
      const Index n = 3, p = 5;
      Matrix x(n, p);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) x(i, j) = 2.0 * rng.next_double() - 1.0;
      const Matrix h = precompute_h(x);
      const Matrix dense = (x.transpose() * x + 2.0 * Matrix::Identity(p, p)).inverse();
      const Vector v = oracle::random_vector(p, rng);
      const Vector fast = 0.5 * v - h * (x * v);
      REQUIRE((fast - dense * v).norm() <= 1e-10 * std::max(1.0, v.norm()));
    }
  }

  SECTION("rank-one design matches the analytic inverse") {
    // X = ones(1, p): (X^T X + 2I)^{-1} = I/2 - (1/(2(p+2))) ones*ones^T
    const Index p = 4;
    const Matrix x = Matrix::Ones(1, p);
    const Matrix h = precompute_h(x);
    const Vector v = oracle::random_vector(p, rng);
    const Vector fast = 0.5 * v - h * (x * v);
    const Vector analytic =
        0.5 * v - Vector::Ones(p) * (v.sum() / (2.0 * (static_cast<double>(p) + 2.0)));
    REQUIRE((fast - analytic).norm() <= 1e-10);
  }
}

TEST_CASE("strong l1 weight empties the model") {
  Rng rng(43);
  StructuredSetup setup{GridParcellation::full({3, 2, 1})};
  auto data = oracle::random_instance(8, setup.map.p, rng);

  SolverConfig cfg;
  cfg.lambda = 8.0;  // 2^3
  cfg.gamma = 1e-3;

  for (auto reg : {Regularizer::FusedLasso, Regularizer::GraphNet}) {
    cfg.regularizer = reg;
    const Model model = fit_structured(data, setup.parc, setup.map, setup.kernel, cfg);
    REQUIRE(model.nnz == 0);
    REQUIRE(model.w.cwiseAbs().maxCoeff() <= kSparsityTol);
  }
  for (auto reg : {Regularizer::Lasso, Regularizer::ElasticNet}) {
    cfg.regularizer = reg;
    const Model model = fit_elasticnet(data, cfg);
    REQUIRE(model.nnz == 0);
    REQUIRE(model.w.cwiseAbs().maxCoeff() <= kSparsityTol);
  }
}

TEST_CASE("subgradient optimality on tiny instances") {
  Rng rng(47);
  StructuredSetup setup{GridParcellation::full({3, 2, 1})};  // p = 15
  const Index n = 6;

  for (int rep = 0; rep < 3; ++rep) {
    auto data = oracle::signal_instance(n, setup.map.p, rng);
    const double lambda = 0.1 + 0.1 * rng.next_double();
    const double gamma = 0.01 + 0.05 * rng.next_double();

    // kink classification at 1e-4 of the weight scale: an iterate converged
    // to 1e-6 relative change represents exact zeros and fused pairs by
    // residues well below that
    SECTION("fused lasso with hinge, instance " + std::to_string(rep)) {
      const auto cfg = tight_config(Regularizer::FusedLasso, lambda, gamma, LossType::Hinge);
      const Model model = fit_structured(data, setup.parc, setup.map, setup.kernel, cfg);
      const double ztol = 1e-4 * std::max(1.0, model.w.cwiseAbs().maxCoeff());
      REQUIRE(oracle::kkt_residual(model.w, data, cfg, &setup.parc, ztol) <= 1e-3);
    }
    SECTION("graphnet with truncated ls, instance " + std::to_string(rep)) {
      const auto cfg = tight_config(Regularizer::GraphNet, lambda, gamma, LossType::TruncatedLs);
      const Model model = fit_structured(data, setup.parc, setup.map, setup.kernel, cfg);
      const double ztol = 1e-4 * std::max(1.0, model.w.cwiseAbs().maxCoeff());
      REQUIRE(oracle::kkt_residual(model.w, data, cfg, &setup.parc, ztol) <= 1e-3);
    }
    SECTION("elastic net with huberized hinge, instance " + std::to_string(rep)) {
      const auto cfg =
          tight_config(Regularizer::ElasticNet, lambda, gamma, LossType::HuberizedHinge);
      const Model model = fit_elasticnet(data, cfg);
      const double ztol = 1e-4 * std::max(1.0, model.w.cwiseAbs().maxCoeff());
      REQUIRE(oracle::kkt_residual(model.w, data, cfg, nullptr, ztol) <= 1e-3);
    }
    SECTION("lasso with hinge, instance " + std::to_string(rep)) {
      const auto cfg = tight_config(Regularizer::Lasso, lambda, 0.0, LossType::Hinge);
      const Model model = fit_elasticnet(data, cfg);
      const double ztol = 1e-4 * std::max(1.0, model.w.cwiseAbs().maxCoeff());
      REQUIRE(oracle::kkt_residual(model.w, data, cfg, nullptr, ztol) <= 1e-3);
    }
  }
}

TEST_CASE("structured solvers at gamma zero reduce to lasso") {
  Rng rng(53);
  StructuredSetup setup{GridParcellation::full({2, 2, 1})};  // p = 6
  auto data = oracle::random_instance(6, setup.map.p, rng);

  auto lasso_cfg = tight_config(Regularizer::Lasso, 0.05, 0.0, LossType::Hinge);
  const Model lasso = fit_elasticnet(data, lasso_cfg);
  const double ref = objective(lasso.w, data, lasso_cfg);

  for (auto reg : {Regularizer::FusedLasso, Regularizer::GraphNet}) {
    auto cfg = tight_config(reg, 0.05, 0.0, LossType::Hinge);
    const Model model = fit_structured(data, setup.parc, setup.map, setup.kernel, cfg);
    const double value = objective(model.w, data, lasso_cfg);
    REQUIRE(std::abs(value - ref) <= 1e-4 * std::abs(ref));
  }
}

TEST_CASE("rho moves the iteration count but not the fixed point") {
  Rng rng(59);
  StructuredSetup setup{GridParcellation::full({2, 2, 1})};
  auto data = oracle::random_instance(6, setup.map.p, rng);

  auto cfg = tight_config(Regularizer::FusedLasso, 0.05, 0.02, LossType::Hinge);
  std::vector<double> objectives;
  for (double rho : {0.5, 1.0, 2.0}) {
    cfg.rho = rho;
    const Model model = fit_structured(data, setup.parc, setup.map, setup.kernel, cfg);
    objectives.push_back(objective(model.w, data, cfg, &setup.map));
  }
  for (double obj : objectives)
    REQUIRE(std::abs(obj - objectives[0]) <= 1e-3 * std::abs(objectives[0]));
}

TEST_CASE("objective reference points") {
  Rng rng(61);
  StructuredSetup setup{GridParcellation::full({2, 2, 1})};
  auto data = oracle::random_instance(5, setup.map.p, rng);

  SECTION("zero weights under hinge cost exactly one") {
    SolverConfig cfg;
    cfg.regularizer = Regularizer::FusedLasso;
    cfg.lambda = 0.3;
    cfg.gamma = 0.7;
    REQUIRE(objective(Vector::Zero(setup.map.p), data, cfg, &setup.map) == 1.0);
  }

  SECTION("no regularization leaves the empirical risk") {
    SolverConfig cfg;
    cfg.regularizer = Regularizer::Lasso;
    cfg.lambda = 0.0;
    const Vector w = oracle::random_vector(setup.map.p, rng);
    double risk = 0.0;
    for (Index i = 0; i < data.X.rows(); ++i)
      risk += loss_value(cfg.loss, data.y[i] * data.X.row(i).dot(w));
    risk /= static_cast<double>(data.X.rows());
    REQUIRE(objective(w, data, cfg) == Approx(risk).margin(1e-15));
  }

  SECTION("structured objective needs the map") {
    SolverConfig cfg;
    cfg.regularizer = Regularizer::GraphNet;
    REQUIRE_THROWS_AS(objective(Vector::Zero(setup.map.p), data, cfg), StructuralError);
  }
}

TEST_CASE("elastic net keeps every feature without l1") {
  Rng rng(67);
  auto data = oracle::random_instance(10, 8, rng);
  SolverConfig cfg = tight_config(Regularizer::ElasticNet, 0.0, 0.5, LossType::TruncatedLs);
  const Model model = fit_elasticnet(data, cfg);
  REQUIRE(model.nnz == 8);
}

TEST_CASE("determinism: identical inputs give identical traces") {
  Rng rng(71);
  StructuredSetup setup{GridParcellation::full({2, 2, 1})};
  auto data = oracle::random_instance(6, setup.map.p, rng);
  auto cfg = tight_config(Regularizer::FusedLasso, 0.03, 0.01, LossType::Hinge);
  cfg.max_iters = 200;

  const Model first = fit_structured(data, setup.parc, setup.map, setup.kernel, cfg);
  const Model second = fit_structured(data, setup.parc, setup.map, setup.kernel, cfg);
  REQUIRE(first.iterations_run == second.iterations_run);
  REQUIRE(first.objective_trace == second.objective_trace);
  REQUIRE((first.w - second.w).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("feasibility gaps close at convergence") {
  Rng rng(73);
  StructuredSetup setup{GridParcellation::full({2, 2, 1})};
  auto data = oracle::random_instance(6, setup.map.p, rng);
  auto cfg = tight_config(Regularizer::FusedLasso, 0.05, 0.02, LossType::Hinge);
  const Model model = fit_structured(data, setup.parc, setup.map, setup.kernel, cfg);
  REQUIRE(model.converged);

  const double scale = 1e-3 * (1.0 + model.w.norm());
  for (double gap : model.constraint_gaps) REQUIRE(gap <= scale);

  cfg = tight_config(Regularizer::ElasticNet, 0.05, 0.02, LossType::Hinge);
  const Model enet = fit_elasticnet(data, cfg);
  REQUIRE(enet.converged);
  const double enet_scale = 1e-3 * (1.0 + enet.w.norm());
  REQUIRE(enet.constraint_gaps[0] <= enet_scale);
  REQUIRE(enet.constraint_gaps[1] <= enet_scale);
}

TEST_CASE("prediction uses the sign convention") {
  Model model;
  model.w = Vector::Zero(3);
  Vector x(3);
  x << -3.0, 1.0, 2.0;
  REQUIRE(predict(model, x) == +1);  // ties go positive

  model.w = Vector::Unit(3, 0);
  REQUIRE(predict(model, x) == -1);
  REQUIRE(decision_value(model, x) == -3.0);
  REQUIRE_THROWS_AS(predict(model, Vector::Zero(2)), StructuralError);
}

TEST_CASE("labels are validated") {
  TrainingSet data;
  data.X = Matrix::Zero(2, 3);
  data.y.resize(2);
  data.y << 1.0, 0.5;
  SolverConfig cfg;
  cfg.regularizer = Regularizer::Lasso;
  REQUIRE_THROWS_AS(fit_elasticnet(data, cfg), StructuralError);
}
