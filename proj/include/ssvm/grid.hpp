#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "ssvm/errors.hpp"

namespace ssvm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Regular node lattice with a boolean support marking which cells carry real
/// nodes. Nodes are numbered lexicographically by (x, y, z). A feature
/// coordinate is an unordered node pair (a, b) with a > b, stored in the
/// column-major lower-triangular scan order of the node-by-node correlation
/// matrix, so coordinate j lives at a 6-D lattice point (r_a, r_b).
class GridParcellation {
 public:
  GridParcellation(std::array<int, 3> dims, std::vector<std::uint8_t> support,
                   double spacing_mm = 18.0)
      : dims_(dims), support_(std::move(support)), spacing_mm_(spacing_mm) {
    if (dims_[0] < 1 || dims_[1] < 1 || dims_[2] < 1)
      throw StructuralError("parcellation dims must be positive");
    const int cells = dims_[0] * dims_[1] * dims_[2];
    if (static_cast<int>(support_.size()) != cells)
      throw StructuralError("support length does not match lattice size");
    node_of_cell_.assign(cells, -1);
    for (int c = 0; c < cells; ++c) {
      if (support_[c]) {
        node_of_cell_[c] = static_cast<int>(cell_of_node_.size());
        cell_of_node_.push_back(c);
      }
    }
    if (node_count() < 2) throw StructuralError("parcellation needs at least two nodes");
  }

  /// Lattice with every cell in support.
  static GridParcellation full(std::array<int, 3> dims, double spacing_mm = 18.0) {
    const int cells = dims[0] * dims[1] * dims[2];
    return GridParcellation(dims, std::vector<std::uint8_t>(cells, 1), spacing_mm);
  }

  const std::array<int, 3>& dims() const { return dims_; }
  double spacing_mm() const { return spacing_mm_; }
  const std::vector<std::uint8_t>& support() const { return support_; }

  int cell_count() const { return dims_[0] * dims_[1] * dims_[2]; }
  int node_count() const { return static_cast<int>(cell_of_node_.size()); }
  Index edge_count() const {
    const Index d = node_count();
    return d * (d - 1) / 2;
  }

  bool contains(int x, int y, int z) const {
    return x >= 0 && x < dims_[0] && y >= 0 && y < dims_[1] && z >= 0 && z < dims_[2];
  }
  bool in_support(int x, int y, int z) const {
    return contains(x, y, z) && support_[cell_index(x, y, z)] != 0;
  }

  /// Flat cell index in lexicographic (x, y, z) node order (z fastest).
  int cell_index(int x, int y, int z) const { return (x * dims_[1] + y) * dims_[2] + z; }

  std::array<int, 3> cell_coords(int cell) const {
    const int z = cell % dims_[2];
    const int rest = cell / dims_[2];
    return {rest / dims_[1], rest % dims_[1], z};
  }

  int node_of_cell(int cell) const { return node_of_cell_[cell]; }
  int cell_of_node(int node) const { return cell_of_node_[node]; }

  /// Canonical index of the edge between two distinct nodes.
  Index edge_index(int a, int b) const {
    const int d = node_count();
    if (a == b || a < 0 || b < 0 || a >= d || b >= d)
      throw StructuralError("invalid node pair for edge index");
    if (a < b) std::swap(a, b);
    const Index col = b;
    return col * d - col * (col + 1) / 2 + (a - b - 1);
  }

  /// Inverse of edge_index; returns (a, b) with a > b.
  std::pair<int, int> edge_nodes(Index e) const {
    const Index d = node_count();
    if (e < 0 || e >= edge_count()) throw StructuralError("edge index out of range");
    Index b = 0;
    Index offset = 0;
    while (offset + (d - 1 - b) <= e) {
      offset += d - 1 - b;
      ++b;
    }
    const Index a = b + 1 + (e - offset);
    return {static_cast<int>(a), static_cast<int>(b)};
  }

 private:
  std::array<int, 3> dims_;
  std::vector<std::uint8_t> support_;
  std::vector<int> node_of_cell_;
  std::vector<int> cell_of_node_;
  double spacing_mm_;
};

/// Strictly-lower-triangular entries of a node correlation matrix in the
/// canonical scan order. The diagonal is ignored.
inline Vector vectorize_connectome(const Matrix& corr, const GridParcellation& parc) {
  const Index d = parc.node_count();
  if (corr.rows() != d || corr.cols() != d)
    throw StructuralError("correlation matrix does not match parcellation node count");
  if (!corr.isApprox(corr.transpose(), 1e-12))
    throw StructuralError("correlation matrix must be symmetric");
  Vector x(parc.edge_count());
  Index k = 0;
  for (Index b = 0; b < d; ++b)
    for (Index a = b + 1; a < d; ++a) x[k++] = corr(a, b);
  return x;
}

/// Rebuilds the symmetric matrix (zero diagonal) from a coordinate vector.
inline Matrix matricize(const Vector& x) {
  const double root = (1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(x.size()))) / 2.0;
  const Index d = static_cast<Index>(std::llround(root));
  if (d * (d - 1) / 2 != x.size())
    throw StructuralError("vector length is not a triangular number");
  Matrix m = Matrix::Zero(d, d);
  Index k = 0;
  for (Index b = 0; b < d; ++b)
    for (Index a = b + 1; a < d; ++a) {
      m(a, b) = x[k];
      m(b, a) = x[k];
      ++k;
    }
  return m;
}

/// First-order neighbors of coordinate j: coordinates whose canonical 6-D
/// lattice point differs from j's in exactly one axis by one step. Perturbed
/// points that leave the support are excluded, as are points whose node pair
/// is no longer in canonical (a > b) order, so k is a neighbor of j exactly
/// when j is a neighbor of k.
inline std::vector<Index> neighborhood(Index j, const GridParcellation& parc) {
  if (j < 0 || j >= parc.edge_count()) throw StructuralError("coordinate index out of range");
  const auto [a, b] = parc.edge_nodes(j);
  const auto ra = parc.cell_coords(parc.cell_of_node(a));
  const auto rb = parc.cell_coords(parc.cell_of_node(b));

  std::vector<Index> result;
  result.reserve(12);
  const int point[6] = {ra[0], ra[1], ra[2], rb[0], rb[1], rb[2]};
  for (int axis = 0; axis < 6; ++axis) {
    for (int step : {-1, +1}) {
      int q[6] = {point[0], point[1], point[2], point[3], point[4], point[5]};
      q[axis] += step;
      const bool first_half = axis < 3;
      const int px = first_half ? q[0] : q[3];
      const int py = first_half ? q[1] : q[4];
      const int pz = first_half ? q[2] : q[5];
      if (!parc.in_support(px, py, pz)) continue;
      const int moved = parc.node_of_cell(parc.cell_index(px, py, pz));
      const int na = first_half ? moved : a;
      const int nb = first_half ? b : moved;
      if (na <= nb) continue;  // not a canonical point; no coordinate lives there
      result.push_back(parc.edge_index(na, nb));
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

}  // namespace ssvm
