#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "ssvm/eval.hpp"
#include "ssvm/simulate.hpp"

using namespace ssvm;
using Catch::Approx;

TEST_CASE("slice geometry") {
  const auto parc = slice66_parcellation();
  REQUIRE(parc.node_count() == 66);
  REQUIRE(parc.edge_count() == 2145);  // C(66, 2)

  // the default anomalous clusters are plus-shaped and disjoint
  const auto params = default_simulation();
  for (int node : params.cluster_a) REQUIRE(node < 66);
  for (int node : params.cluster_b) REQUIRE(node < 66);
}

TEST_CASE("anomalous edge set") {
  SECTION("default clusters span 25 edges") {
    const auto params = default_simulation();
    REQUIRE(anomalous_edges(params).size() == 25);
  }

  SECTION("singleton clusters give a single edge") {
    auto params = default_simulation();
    params.cluster_a = {0};
    params.cluster_b = {1};
    const auto edges = anomalous_edges(params);
    REQUIRE(edges.size() == 1);
    REQUIRE(edges[0] == params.parc.edge_index(1, 0));
  }

  SECTION("empty cluster gives no signal") {
    auto params = default_simulation();
    params.cluster_a = {};
    REQUIRE(anomalous_edges(params).empty());
    // with no anomalous edges, patient and control draws coincide
    Rng ra(5), rb(5);
    const Vector control = sample_control(params, ra);
    const Vector patient = sample_patient(params, rb);
    REQUIRE((control - patient).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("overlapping clusters are structural") {
    auto params = default_simulation();
    params.cluster_b.push_back(params.cluster_a.front());
    REQUIRE_THROWS_AS(anomalous_edges(params), StructuralError);
  }
}

TEST_CASE("sampling distribution") {
  SECTION("zero effect size makes the classes exchangeable") {
    auto params = default_simulation(99);
    params.effect_size = 0.0;
    Rng ra(123), rb(123);
    const Vector control = sample_control(params, ra);
    const Vector patient = sample_patient(params, rb);
    REQUIRE((control - patient).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("all draws stay strictly inside (-1, 1)") {
    const auto params = default_simulation(7);
    const auto dataset = generate_dataset(params, 20, 20);
    REQUIRE(dataset.data.X.cwiseAbs().maxCoeff() < 1.0);
  }

  SECTION("patient mean at an anomalous edge matches quadrature") {
    auto params = default_simulation(11);
    const auto edges = anomalous_edges(params);
    const Index k = edges.front();
    const double mean = params.mu[k] + params.effect_size * params.sigma[k];
    const double expected = oracle::expected_tanh(mean, params.sigma[k]);

    Rng rng(2024);
    const int draws = 100000;
    double acc = 0.0;
    for (int i = 0; i < draws; ++i) acc += sample_patient(params, rng)[k];
    acc /= draws;
    // three standard errors of the Monte Carlo mean; tanh values are bounded
    const double se = 3.0 * params.sigma[k] / std::sqrt(static_cast<double>(draws));
    REQUIRE(std::abs(acc - expected) <= se);
  }
}

TEST_CASE("generate_dataset") {
  SECTION("balanced cohort layout and determinism") {
    const auto params = default_simulation(31);
    const auto a = generate_dataset(params, 50, 50);
    const auto b = generate_dataset(params, 50, 50);
    REQUIRE(a.data.X.rows() == 100);
    REQUIRE((a.data.y.head(50).array() == -1.0).all());
    REQUIRE((a.data.y.tail(50).array() == 1.0).all());
    REQUIRE((a.data.X - b.data.X).cwiseAbs().maxCoeff() == 0.0);

    const auto params2 = default_simulation(32);
    const auto c = generate_dataset(params2, 50, 50);
    REQUIRE((a.data.X - c.data.X).cwiseAbs().maxCoeff() > 0.0);
  }

  SECTION("empty cohort still reports the ground truth") {
    const auto params = default_simulation();
    const auto dataset = generate_dataset(params, 0, 0);
    REQUIRE(dataset.data.X.rows() == 0);
    REQUIRE(std::count(dataset.truth.begin(), dataset.truth.end(), 1) == 25);
  }

  SECTION("test-sized cohort") {
    const auto params = default_simulation(1);
    const auto dataset = generate_dataset(params, 250, 250);
    REQUIRE(dataset.data.X.rows() == 500);
  }
}

TEST_CASE("null signal keeps accuracy near chance") {
  // with effect size zero, a tuned-on-noise classifier cannot beat 0.5 on a
  // fresh balanced test set by more than sampling noise
  auto params = default_simulation(77);
  params.effect_size = 0.0;
  const auto train = generate_dataset(params, 25, 25);
  auto test_params = params;
  test_params.seed = 1077;
  const auto test = generate_dataset(test_params, 100, 100);

  SolverConfig cfg;
  cfg.regularizer = Regularizer::Lasso;
  cfg.lambda = std::exp2(-7);
  const Model model = fit_elasticnet(train.data, cfg);
  const double acc = accuracy(model, test.data);
  REQUIRE(acc >= 0.35);
  REQUIRE(acc <= 0.65);
}
