#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "ssvm/grid.hpp"
#include "ssvm/rng.hpp"
#include "ssvm/solver.hpp"

namespace ssvm {

/// Bounded 66-node slice used by the shipped cohort profile. Rows (x) run
/// bottom to top, columns (y) left to right; node numbering follows the
/// lexicographic (x, y, z) order.
inline GridParcellation slice66_parcellation() {
  const std::array<int, 3> dims{10, 8, 1};
  std::vector<std::uint8_t> support(80, 0);
  auto row = [&](int x, int y_from, int y_to) {
    for (int y = y_from; y <= y_to; ++y) support[x * 8 + y] = 1;
  };
  row(0, 2, 6);
  row(1, 1, 6);
  for (int x = 2; x <= 6; ++x) row(x, 0, 7);
  row(7, 1, 7);
  row(8, 1, 6);
  row(9, 3, 4);
  return GridParcellation(dims, support);
}

/// Synthetic cohort description. Edge values are drawn in the Fisher domain
/// as Normal(mu, sigma^2) and mapped back through tanh; patient draws add an
/// effect_size * sigma mean shift on the anomalous edges, which form the
/// complete bipartite set between cluster_a and cluster_b.
struct SimulationParams {
  GridParcellation parc = slice66_parcellation();
  Vector mu;
  Vector sigma;
  std::vector<int> cluster_a;
  std::vector<int> cluster_b;
  double effect_size = 0.6;
  std::uint64_t seed = 0;
};

/// Fixed stream that generates the shipped mu/sigma profile, so the default
/// cohort distribution is identical everywhere.
inline constexpr std::uint64_t kProfileSeed = 0x53d1ce66;

/// Draws the shipped edge profile for the given parcellation:
/// mu ~ Normal(0, 0.3^2) and sigma ~ Uniform[0.15, 0.35] per edge.
inline void fill_default_profile(SimulationParams& params) {
  const Index p = params.parc.edge_count();
  params.mu.resize(p);
  params.sigma.resize(p);
  Rng rng(kProfileSeed);
  for (Index k = 0; k < p; ++k) params.mu[k] = 0.3 * rng.next_normal();
  for (Index k = 0; k < p; ++k) params.sigma[k] = 0.15 + 0.2 * rng.next_double();
}

/// Default cohort on the 66-node slice with the two plus-shaped anomalous
/// clusters (node ids are 0-based).
inline SimulationParams default_simulation(std::uint64_t seed = 0) {
  SimulationParams params;
  params.seed = seed;
  fill_default_profile(params);
  params.cluster_a = {7, 13, 14, 15, 22};
  params.cluster_b = {40, 47, 48, 49, 55};
  return params;
}

inline void validate(const SimulationParams& params) {
  const Index p = params.parc.edge_count();
  if (params.mu.size() != p || params.sigma.size() != p)
    throw StructuralError("mu/sigma length does not match edge count");
  if ((params.sigma.array() <= 0.0).any()) throw StructuralError("sigma entries must be > 0");
  const int d = params.parc.node_count();
  std::set<int> seen;
  for (int a : params.cluster_a) {
    if (a < 0 || a >= d) throw StructuralError("cluster_a node out of range");
    seen.insert(a);
  }
  for (int b : params.cluster_b) {
    if (b < 0 || b >= d) throw StructuralError("cluster_b node out of range");
    if (seen.count(b)) throw StructuralError("anomalous clusters must be disjoint");
  }
}

/// Edge indices of the complete bipartite graph between the two clusters.
inline std::vector<Index> anomalous_edges(const SimulationParams& params) {
  validate(params);
  std::vector<Index> edges;
  edges.reserve(params.cluster_a.size() * params.cluster_b.size());
  for (int a : params.cluster_a)
    for (int b : params.cluster_b) edges.push_back(params.parc.edge_index(a, b));
  std::sort(edges.begin(), edges.end());
  return edges;
}

namespace detail {

inline Vector sample_connectome(const SimulationParams& params, Rng& rng,
                                const std::vector<std::uint8_t>& shifted, double shift_scale) {
  const Index p = params.parc.edge_count();
  Vector x(p);
  const double upper = std::nextafter(1.0, 0.0);
  for (Index k = 0; k < p; ++k) {
    const double mean = params.mu[k] + (shifted[k] ? shift_scale * params.sigma[k] : 0.0);
    const double z = mean + params.sigma[k] * rng.next_normal();
    x[k] = std::clamp(std::tanh(z), -upper, upper);
  }
  return x;
}

inline std::vector<std::uint8_t> truth_mask(const SimulationParams& params) {
  std::vector<std::uint8_t> truth(params.parc.edge_count(), 0);
  for (Index k : anomalous_edges(params)) truth[k] = 1;
  return truth;
}

}  // namespace detail

inline Vector sample_control(const SimulationParams& params, Rng& rng) {
  validate(params);
  return detail::sample_connectome(params, rng, detail::truth_mask(params), 0.0);
}

inline Vector sample_patient(const SimulationParams& params, Rng& rng) {
  validate(params);
  return detail::sample_connectome(params, rng, detail::truth_mask(params), params.effect_size);
}

struct LabeledDataset {
  TrainingSet data;
  std::vector<std::uint8_t> truth;  // anomalous-edge support over [p]
};

/// Labeled cohort: n_control rows with y = -1 followed by n_patient rows with
/// y = +1. Each subject draws from its own derived stream, so the result is
/// reproducible and independent of any sampling schedule.
inline LabeledDataset generate_dataset(const SimulationParams& params, int n_control,
                                       int n_patient) {
  validate(params);
  if (n_control < 0 || n_patient < 0) throw StructuralError("cohort sizes must be >= 0");
  const Index p = params.parc.edge_count();
  const auto truth = detail::truth_mask(params);

  LabeledDataset out;
  out.truth = truth;
  const int n = n_control + n_patient;
  out.data.X.resize(n, p);
  out.data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const bool patient = i >= n_control;
    Rng rng = Rng::for_subject(params.seed, static_cast<std::uint64_t>(i));
    const Vector x =
        detail::sample_connectome(params, rng, truth, patient ? params.effect_size : 0.0);
    out.data.X.row(i) = x.transpose();
    out.data.y[i] = patient ? 1.0 : -1.0;
  }
  return out;
}

}  // namespace ssvm
