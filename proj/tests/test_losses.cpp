#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "ssvm/losses.hpp"
#include "ssvm/rng.hpp"

using namespace ssvm;
using Catch::Approx;

namespace {
const Loss kHinge{LossType::Hinge, 0.5};
const Loss kTls{LossType::TruncatedLs, 0.5};
const Loss kHuber{LossType::HuberizedHinge, 0.5};
}  // namespace

TEST_CASE("loss values at reference points") {
  REQUIRE(loss_value(kHinge, 0.0) == 1.0);
  REQUIRE(loss_value(kHinge, 2.0) == 0.0);
  REQUIRE(loss_value(kTls, -1.0) == 4.0);
  REQUIRE(loss_value(kHuber, 1.0) == 0.0);
  REQUIRE(loss_value(kHuber, 0.75) == Approx(0.0625).margin(1e-15));
  REQUIRE(loss_value(kHuber, -1.0) == Approx(2.0 - 0.25).margin(1e-15));  // linear branch
}

TEST_CASE("proximal operators match the tabulated branches") {
  SECTION("hinge with tau = 2") {
    REQUIRE(loss_prox(kHinge, 2.0, 2.0) == 2.0);
    REQUIRE(loss_prox(kHinge, 0.0, 2.0) == 1.0);
    REQUIRE(loss_prox(kHinge, -3.0, 2.0) == -1.0);
  }
  SECTION("truncated least squares with tau = 1") {
    REQUIRE(loss_prox(kTls, 0.0, 1.0) == Approx(2.0 / 3.0).margin(1e-15));
    REQUIRE(loss_prox(kTls, 1.5, 1.0) == 1.5);
  }
  SECTION("huberized hinge stays on the identity above the margin") {
    REQUIRE(loss_prox(kHuber, 1.25, 2.0) == 1.25);
    REQUIRE(loss_prox(kHuber, -5.0, 2.0) == -3.0);
  }
  SECTION("tau must be positive") {
    REQUIRE_THROWS_AS(loss_prox(kHinge, 0.0, 0.0), StructuralError);
    REQUIRE_THROWS_AS(loss_prox(kHinge, 0.0, -1.0), StructuralError);
  }
}

TEST_CASE("soft threshold") {
  REQUIRE(soft_threshold(5.0, 2.0) == 3.0);
  REQUIRE(soft_threshold(1.0, 2.0) == 0.0);
  REQUIRE(soft_threshold(-4.0, 1.5) == -2.5);
  REQUIRE(soft_threshold(2.0, 0.0) == 2.0);
  REQUIRE_THROWS_AS(soft_threshold(1.0, -0.1), StructuralError);
}

TEST_CASE("prox properties over random draws") {
  Rng rng(21);
  const Loss losses[] = {kHinge, kTls, kHuber, {LossType::HuberizedHinge, 1.7}};

  SECTION("matches derivative-free minimization") {
    for (int rep = 0; rep < 200; ++rep) {
      const Loss& loss = losses[rep % 4];
      const double t = 10.0 * rng.next_double() - 5.0;
      const double tau = 4.0 * rng.next_double() + 1e-6;
      const double expected = oracle::golden_section_prox(loss, t, tau);
      REQUIRE(loss_prox(loss, t, tau) == Approx(expected).margin(1e-6));
    }
  }

  SECTION("nonexpansiveness") {
    for (int rep = 0; rep < 200; ++rep) {
      const Loss& loss = losses[rep % 4];
      const double tau = 4.0 * rng.next_double() + 1e-6;
      const double t1 = 10.0 * rng.next_double() - 5.0;
      const double t2 = 10.0 * rng.next_double() - 5.0;
      const double d = std::abs(loss_prox(loss, t1, tau) - loss_prox(loss, t2, tau));
      REQUIRE(d <= std::abs(t1 - t2) + 1e-12);
    }
  }

  SECTION("optimality: zero sits in tau * dl(u) + (u - t)") {
    for (int rep = 0; rep < 200; ++rep) {
      const Loss& loss = losses[rep % 4];
      const double t = 10.0 * rng.next_double() - 5.0;
      const double tau = 4.0 * rng.next_double() + 1e-6;
      const double u = loss_prox(loss, t, tau);
      const auto g = loss_subgradient(loss, u);
      const double lo = tau * g.lo + (u - t);
      const double hi = tau * g.hi + (u - t);
      REQUIRE(lo <= 1e-9);
      REQUIRE(hi >= -1e-9);
    }
  }

  SECTION("prox approaches the identity as tau vanishes") {
    for (const Loss& loss : losses) {
      for (double t : {-2.0, 0.3, 0.9999, 1.0001, 4.0}) {
        REQUIRE(loss_prox(loss, t, 1e-12) == Approx(t).margin(1e-10));
      }
    }
  }

  SECTION("soft threshold is the prox of the absolute value") {
    for (int rep = 0; rep < 100; ++rep) {
      const double t = 10.0 * rng.next_double() - 5.0;
      const double tau = 4.0 * rng.next_double() + 1e-6;
      // golden section on tau*|u| + (u-t)^2/2
      const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
      double a = -12.0, b = 12.0;
      auto g = [&](double u) { return tau * std::abs(u) + 0.5 * (u - t) * (u - t); };
      double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
      double g1 = g(x1), g2 = g(x2);
      for (int it = 0; it < 120; ++it) {
        if (g1 < g2) {
          b = x2; x2 = x1; g2 = g1; x1 = b - phi * (b - a); g1 = g(x1);
        } else {
          a = x1; x1 = x2; g1 = g2; x2 = a + phi * (b - a); g2 = g(x2);
        }
      }
      REQUIRE(soft_threshold(t, tau) == Approx((a + b) / 2.0).margin(1e-6));
    }
  }
}
