#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "ssvm/grid.hpp"
#include "ssvm/rng.hpp"

using namespace ssvm;

TEST_CASE("edge indexing follows the lower-triangular column-major scan") {
  auto parc = GridParcellation::full({4, 1, 1});
  REQUIRE(parc.edge_count() == 6);
  // column 0: (1,0) (2,0) (3,0), column 1: (2,1) (3,1), column 2: (3,2)
  REQUIRE(parc.edge_index(1, 0) == 0);
  REQUIRE(parc.edge_index(3, 0) == 2);
  REQUIRE(parc.edge_index(2, 1) == 3);
  REQUIRE(parc.edge_index(3, 2) == 5);
  REQUIRE(parc.edge_index(2, 3) == 5);  // order-insensitive

  for (Index e = 0; e < parc.edge_count(); ++e) {
    const auto [a, b] = parc.edge_nodes(e);
    REQUIRE(a > b);
    REQUIRE(parc.edge_index(a, b) == e);
  }
}

TEST_CASE("vectorize extracts the strict lower triangle in scan order") {
  auto parc = GridParcellation::full({3, 1, 1});

  SECTION("identity correlation gives zeros") {
    const Vector x = vectorize_connectome(Matrix::Identity(3, 3), parc);
    REQUIRE(x.isZero(0.0));
  }

  SECTION("entries land in canonical order") {
    Matrix corr = Matrix::Identity(3, 3);
    corr(1, 0) = corr(0, 1) = 0.5;
    corr(2, 0) = corr(0, 2) = -0.2;
    corr(2, 1) = corr(1, 2) = 0.9;
    const Vector x = vectorize_connectome(corr, parc);
    REQUIRE(x[0] == 0.5);
    REQUIRE(x[1] == -0.2);
    REQUIRE(x[2] == 0.9);
  }

  SECTION("dimension mismatch is structural") {
    REQUIRE_THROWS_AS(vectorize_connectome(Matrix::Identity(4, 4), parc), StructuralError);
  }

  SECTION("asymmetric input is rejected") {
    Matrix corr = Matrix::Identity(3, 3);
    corr(1, 0) = 0.5;
    REQUIRE_THROWS_AS(vectorize_connectome(corr, parc), StructuralError);
  }
}

TEST_CASE("66-node slice produces 2145 coordinates") {
  // C(66,2) edges on the bounded two-dimensional support
  auto parc = GridParcellation({10, 8, 1}, [] {
    std::vector<std::uint8_t> s(80, 1);
    return s;
  }());
  REQUIRE(GridParcellation::full({66, 1, 1}).edge_count() == 2145);
  REQUIRE(parc.edge_count() == 80 * 79 / 2);
}

TEST_CASE("matricize inverts vectorize off the diagonal") {
  auto parc = GridParcellation::full({2, 3, 1});
  Rng rng(7);
  Matrix corr(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j <= i; ++j) {
      corr(i, j) = 2.0 * rng.next_double() - 1.0;
      corr(j, i) = corr(i, j);
    }
  const Matrix roundtrip = matricize(vectorize_connectome(corr, parc));
  const Matrix expected = corr - corr.diagonal().asDiagonal().toDenseMatrix();
  REQUIRE((roundtrip - expected).cwiseAbs().maxCoeff() == 0.0);

  REQUIRE(matricize(Vector::Zero(3)).isZero(0.0));
  Vector three(3);
  three << 1, 2, 3;
  const Matrix m = matricize(three);
  REQUIRE(m(1, 0) == 1.0);
  REQUIRE(m(2, 0) == 2.0);
  REQUIRE(m(2, 1) == 3.0);
  REQUIRE(m(0, 1) == 1.0);

  // 347 nodes means C(347,2) = 60031 coordinates
  REQUIRE(matricize(Vector::Zero(60031)).rows() == 347);
  REQUIRE_THROWS_AS(matricize(Vector::Zero(4)), StructuralError);
}

TEST_CASE("neighborhood matches the six-axis one-step definition") {
  SECTION("interior edge in a flat slice has eight neighbors") {
    auto parc = GridParcellation::full({7, 5, 1});
    // pick two interior nodes far apart so every perturbation stays canonical
    const int a = parc.node_of_cell(parc.cell_index(5, 2, 0));
    const int b = parc.node_of_cell(parc.cell_index(1, 2, 0));
    const auto n = neighborhood(parc.edge_index(a, b), parc);
    REQUIRE(n.size() == 8);
  }

  SECTION("symmetry: k in N_j iff j in N_k") {
    Rng rng(11);
    auto parc = oracle::random_parcellation({3, 3, 2}, rng);
    for (Index j = 0; j < parc.edge_count(); ++j) {
      for (Index k : neighborhood(j, parc)) {
        const auto back = neighborhood(k, parc);
        REQUIRE(std::find(back.begin(), back.end(), j) != back.end());
      }
    }
  }

  SECTION("two isolated far-apart nodes have no neighbors") {
    std::vector<std::uint8_t> support(5 * 5, 0);
    support[0] = 1;   // (0,0)
    support[24] = 1;  // (4,4)
    auto parc = GridParcellation({5, 5, 1}, support);
    REQUIRE(parc.edge_count() == 1);
    REQUIRE(neighborhood(0, parc).empty());
  }

  SECTION("single edge on a 2x1x1 support has no neighbors") {
    auto parc = GridParcellation::full({2, 1, 1});
    REQUIRE(parc.edge_count() == 1);
    REQUIRE(neighborhood(0, parc).empty());
  }

  SECTION("out-of-range coordinate is structural") {
    auto parc = GridParcellation::full({2, 2, 1});
    REQUIRE_THROWS_AS(neighborhood(parc.edge_count(), parc), StructuralError);
  }
}
