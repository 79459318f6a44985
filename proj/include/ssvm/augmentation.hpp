#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ssvm/grid.hpp"

namespace ssvm {

/// Axis lengths of the dense 6-D array over all cell pairs, fastest varying
/// first. A pair position factors as c_first + D * c_second with cells in
/// z-fastest order, so the axes are (z1, y1, x1, z2, y2, x2).
inline std::array<int, 6> lattice_axes(const GridParcellation& parc) {
  const auto& d = parc.dims();
  return {d[2], d[1], d[0], d[2], d[1], d[0]};
}

inline std::array<std::int64_t, 6> lattice_strides(const std::array<int, 6>& axes) {
  std::array<std::int64_t, 6> strides{};
  std::int64_t s = 1;
  for (int a = 0; a < 6; ++a) {
    strides[a] = s;
    s *= axes[a];
  }
  return strides;
}

/// Index maps realizing the zero-padding embedding of the p connectome
/// coordinates into the dense array of all D^2 cell pairs, where the
/// differencing operator is circulant along every axis. Each coordinate
/// (a, b) with a > b occupies the single position (cell_a, cell_b); ghost
/// cells, the diagonal, and the upper triangle stay structurally zero.
///
/// The mask keeps exactly the difference rows that connect two populated
/// positions one lattice step apart without wrapping around the torus; one
/// such row exists per unordered pair of neighboring coordinates.
struct AugmentationMap {
  std::array<int, 6> axis_len{};
  std::array<std::int64_t, 6> axis_stride{};
  Index p = 0;
  Index p_tilde = 0;
  Index e_tilde = 0;
  std::vector<std::int64_t> forward_index;  // coordinate -> position
  std::vector<std::uint8_t> populated;      // position -> is a real coordinate
  std::vector<std::uint8_t> mask;           // row -> survives masking
  std::int64_t mask_count = 0;
};

inline AugmentationMap build_augmentation(const GridParcellation& parc) {
  AugmentationMap map;
  map.axis_len = lattice_axes(parc);
  map.axis_stride = lattice_strides(map.axis_len);
  const std::int64_t cells = parc.cell_count();
  map.p = parc.edge_count();
  map.p_tilde = cells * cells;
  map.e_tilde = 6 * map.p_tilde;

  const int d = parc.node_count();
  map.forward_index.resize(map.p);
  map.populated.assign(map.p_tilde, 0);
  Index e = 0;
  for (int b = 0; b < d; ++b) {
    const std::int64_t cb = parc.cell_of_node(b);
    for (int a = b + 1; a < d; ++a, ++e) {
      const std::int64_t pos = parc.cell_of_node(a) + cells * cb;
      map.forward_index[e] = pos;
      map.populated[pos] = 1;
    }
  }

  map.mask.assign(map.e_tilde, 0);
  for (int axis = 0; axis < 6; ++axis) {
    const std::int64_t len = map.axis_len[axis];
    const std::int64_t stride = map.axis_stride[axis];
    if (len < 2) continue;  // a single layer only produces wrap rows
    const std::int64_t block = len * stride;
    std::uint8_t* rows = map.mask.data() + axis * map.p_tilde;
    for (std::int64_t base = 0; base < map.p_tilde; base += block) {
      for (std::int64_t inner = 0; inner < stride; ++inner) {
        const std::int64_t line = base + inner;
        for (std::int64_t k = 0; k + 1 < len; ++k) {
          const std::int64_t i = line + k * stride;
          if (map.populated[i] && map.populated[i + stride]) {
            rows[i] = 1;
            ++map.mask_count;
          }
        }
      }
    }
  }
  return map;
}

/// Scatters w into the padded array (zeros elsewhere).
inline Vector augment(const Vector& w, const AugmentationMap& map) {
  if (w.size() != map.p) throw StructuralError("augment: length mismatch");
  Vector out = Vector::Zero(map.p_tilde);
  for (Index j = 0; j < map.p; ++j) out[map.forward_index[j]] = w[j];
  return out;
}

/// Gathers the populated positions back; exact inverse of augment on its range.
inline Vector adjoint_augment(const Vector& wt, const AugmentationMap& map) {
  if (wt.size() != map.p_tilde) throw StructuralError("adjoint_augment: length mismatch");
  Vector out(map.p);
  for (Index j = 0; j < map.p; ++j) out[j] = wt[map.forward_index[j]];
  return out;
}

/// Circulant forward difference along every axis; block a of the output holds
/// w[shift_a(i)] - w[i] over the full torus.
inline void apply_difference(const Vector& wt, const AugmentationMap& map, Vector& out) {
  if (wt.size() != map.p_tilde) throw StructuralError("apply_difference: length mismatch");
  out.resize(map.e_tilde);
  const double* w = wt.data();
  for (int axis = 0; axis < 6; ++axis) {
    const std::int64_t len = map.axis_len[axis];
    const std::int64_t stride = map.axis_stride[axis];
    const std::int64_t block = len * stride;
    double* z = out.data() + axis * map.p_tilde;
    if (len == 1) {
      std::fill(z, z + map.p_tilde, 0.0);
      continue;
    }
    for (std::int64_t base = 0; base < map.p_tilde; base += block) {
      for (std::int64_t inner = 0; inner < stride; ++inner) {
        const std::int64_t line = base + inner;
        for (std::int64_t k = 0; k + 1 < len; ++k) {
          const std::int64_t i = line + k * stride;
          z[i] = w[i + stride] - w[i];
        }
        const std::int64_t last = line + (len - 1) * stride;
        z[last] = w[line] - w[last];
      }
    }
  }
}

inline Vector apply_difference(const Vector& wt, const AugmentationMap& map) {
  Vector out;
  apply_difference(wt, map, out);
  return out;
}

/// Exact transpose of apply_difference.
inline void apply_difference_adjoint(const Vector& z, const AugmentationMap& map, Vector& out) {
  if (z.size() != map.e_tilde) throw StructuralError("apply_difference_adjoint: length mismatch");
  out = Vector::Zero(map.p_tilde);
  double* v = out.data();
  for (int axis = 0; axis < 6; ++axis) {
    const std::int64_t len = map.axis_len[axis];
    const std::int64_t stride = map.axis_stride[axis];
    const std::int64_t block = len * stride;
    const double* zb = z.data() + axis * map.p_tilde;
    if (len == 1) continue;
    for (std::int64_t base = 0; base < map.p_tilde; base += block) {
      for (std::int64_t inner = 0; inner < stride; ++inner) {
        const std::int64_t line = base + inner;
        for (std::int64_t k = 0; k + 1 < len; ++k) {
          const std::int64_t i = line + k * stride;
          v[i + stride] += zb[i];
          v[i] -= zb[i];
        }
        const std::int64_t last = line + (len - 1) * stride;
        v[line] += zb[last];
        v[last] -= zb[last];
      }
    }
  }
}

inline Vector apply_difference_adjoint(const Vector& z, const AugmentationMap& map) {
  Vector out;
  apply_difference_adjoint(z, map, out);
  return out;
}

/// Sum of |z_k|^q over the masked rows of z, counted once per directed
/// neighbor pair. Each masked row represents one unordered pair of adjacent
/// coordinates; the neighborhood double sum visits the pair from both ends,
/// hence the factor two.
inline double masked_penalty(const Vector& z, const AugmentationMap& map, int q) {
  if (z.size() != map.e_tilde) throw StructuralError("masked_penalty: length mismatch");
  if (q != 1 && q != 2) throw StructuralError("penalty exponent must be 1 or 2");
  double acc = 0.0;
  const double* zp = z.data();
  if (q == 1) {
    for (Index k = 0; k < map.e_tilde; ++k)
      if (map.mask[k]) acc += std::abs(zp[k]);
  } else {
    for (Index k = 0; k < map.e_tilde; ++k)
      if (map.mask[k]) acc += zp[k] * zp[k];
  }
  return 2.0 * acc;
}

/// Spatial penalty sum_j sum_{k in N_j} |w_j - w_k|^q evaluated through the
/// masked augmented pipeline.
inline double spatial_penalty(const Vector& w, const AugmentationMap& map, int q) {
  return masked_penalty(apply_difference(augment(w, map), map), map, q);
}

}  // namespace ssvm
