/*
 * Copyright 2026 the gridshare authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GRIDSHARE_PERCOLATION_HPP
#define GRIDSHARE_PERCOLATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gridshare/csv.hpp"
#include "gridshare/graph.hpp"
#include "gridshare/rng.hpp"
#include "gridshare/union_find.hpp"

namespace gridshare::percolation {

/// Two normalizations of percolation strength and susceptibility are
/// supported. `paper` divides the realization sums by V*E (resp. V^2*E);
/// `standard` divides by V*X (resp. V^2*X), i.e. plain Monte Carlo averages.
enum class Normalization { paper, standard };

/// Cluster statistic per realization: size of the largest surviving component
/// (the established percolation-strength quantity, the default), or the
/// smallest component that still has an edge (size >= 2; 1 when none is left).
enum class ClusterStatistic { largest, smallest_surviving };

inline std::string to_string(Normalization n) {
  return n == Normalization::paper ? "paper" : "standard";
}
inline std::string to_string(ClusterStatistic s) {
  return s == ClusterStatistic::largest ? "largest" : "smallest_surviving";
}

struct PercolationConfig {
  int realizations = 200;
  std::vector<double> removal_fractions = uniform_grid(41);
  std::uint64_t seed = 0;
  Normalization normalization = Normalization::paper;
  ClusterStatistic cluster_statistic = ClusterStatistic::largest;

  /// Evenly spaced grid over [0,1] including both endpoints.
  static std::vector<double> uniform_grid(int points) {
    if (points < 2) throw std::invalid_argument("grid needs at least 2 points");
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i)
      g[i] = static_cast<double>(i) / static_cast<double>(points - 1);
    return g;
  }

  void validate() const {
    if (realizations < 1) throw std::invalid_argument("realizations must be >= 1");
    if (removal_fractions.size() < 2 || removal_fractions.front() != 0.0 ||
        removal_fractions.back() != 1.0)
      throw std::invalid_argument("removal fraction grid must contain 0 and 1");
    for (std::size_t i = 0; i < removal_fractions.size(); ++i) {
      double p = removal_fractions[i];
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("removal fractions must lie in [0,1]");
      if (i > 0 && !(p > removal_fractions[i - 1]))
        throw std::invalid_argument("removal fraction grid must be strictly ascending");
    }
  }
};

struct PercolationCurve {
  std::vector<double> removal_fraction;  // p
  std::vector<double> strength;          // PS(p)
  std::vector<double> susceptibility;    // chi(p)
  std::optional<double> threshold;       // argmax chi over interior grid points
  int vertex_count = 0;
  int edge_count = 0;
};

class StructurelessCurveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Removed-edge fraction with maximal susceptibility; ties break toward the
/// smaller fraction and the endpoints p=0, p=1 are excluded (chi is degenerate
/// there). Throws StructurelessCurveError when every interior chi is zero.
inline double percolation_threshold(const PercolationCurve& curve) {
  if (curve.removal_fraction.size() < 3)
    throw std::invalid_argument("curve has no interior grid points");
  double best_chi = 0.0;
  std::optional<double> best_p;
  for (std::size_t i = 1; i + 1 < curve.removal_fraction.size(); ++i) {
    double chi = curve.susceptibility[i];
    if (chi > best_chi) {
      best_chi = chi;
      best_p = curve.removal_fraction[i];
    }
  }
  if (!best_p)
    throw StructurelessCurveError(
        "susceptibility is zero everywhere; no percolation transition");
  return *best_p;
}

/// Monte Carlo bond-removal percolation over the given removal-fraction grid:
/// for each p, X independent realizations each remove round(p*E) distinct
/// edges chosen uniformly from the original edge set, and the cluster
/// statistic of what remains feeds the strength and susceptibility sums.
/// Every (grid point, realization) pair derives its own RNG substream from the
/// seed, so results do not depend on evaluation order.
inline PercolationCurve percolation_curve(const Graph& g,
                                          const PercolationConfig& cfg) {
  cfg.validate();
  const int v = g.vertex_count();
  const int e = g.edge_count();
  if (v == 0 || e == 0) throw std::invalid_argument("graph has no edges");
  if (!g.connected())
    throw std::invalid_argument("percolation requires a connected input graph");

  PercolationCurve curve;
  curve.vertex_count = v;
  curve.edge_count = e;
  curve.removal_fraction = cfg.removal_fractions;
  curve.strength.reserve(cfg.removal_fractions.size());
  curve.susceptibility.reserve(cfg.removal_fractions.size());

  const auto& edges = g.edges();
  std::vector<int> order(e);
  for (std::size_t pi = 0; pi < cfg.removal_fractions.size(); ++pi) {
    const double p = cfg.removal_fractions[pi];
    const int removed = static_cast<int>(std::llround(p * e));
    std::int64_t sum = 0;
    std::int64_t sum_sq = 0;
    for (int m = 0; m < cfg.realizations; ++m) {
      Rng rng = Rng::substream(cfg.seed, pi, static_cast<std::uint64_t>(m));
      for (int i = 0; i < e; ++i) order[i] = i;
      // Fisher-Yates prefix: the first `removed` entries are the removed edges.
      for (int i = 0; i < removed; ++i) {
        int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(e - i)));
        std::swap(order[i], order[j]);
      }
      UnionFind uf(v);
      for (int i = removed; i < e; ++i) {
        auto [a, b] = edges[order[i]];
        uf.unite(a, b);
      }
      int s;
      if (cfg.cluster_statistic == ClusterStatistic::largest) {
        s = 1;
        for (int node = 0; node < v; ++node)
          if (uf.find(node) == node) s = std::max(s, uf.component_size(node));
      } else {
        s = std::numeric_limits<int>::max();
        for (int node = 0; node < v; ++node)
          if (uf.find(node) == node && uf.component_size(node) >= 2)
            s = std::min(s, uf.component_size(node));
        if (s == std::numeric_limits<int>::max()) s = 1;
      }
      sum += s;
      sum_sq += static_cast<std::int64_t>(s) * s;
    }
    const double denom = cfg.normalization == Normalization::paper
                             ? static_cast<double>(e)
                             : static_cast<double>(cfg.realizations);
    const double ps = static_cast<double>(sum) / (static_cast<double>(v) * denom);
    double chi = 0.0;
    if (ps > 0.0) {
      const double second_moment = static_cast<double>(sum_sq) /
                                   (static_cast<double>(v) * v * denom);
      chi = (second_moment - ps * ps) / ps;
    }
    curve.strength.push_back(ps);
    curve.susceptibility.push_back(chi);
  }

  try {
    curve.threshold = percolation_threshold(curve);
  } catch (const StructurelessCurveError&) {
    curve.threshold = std::nullopt;
  }
  return curve;
}

struct ResilienceRow {
  std::string label;
  bool ok = false;
  double threshold = 0.0;
  int vertex_count = 0;
  int edge_count = 0;
  std::string error;
};

/// Batch threshold estimation; a failing graph marks its row instead of
/// aborting the run. Every row uses the same config (and seed).
inline std::vector<ResilienceRow> resilience_report(
    const std::vector<std::pair<std::string, Graph>>& labeled_graphs,
    const PercolationConfig& cfg) {
  std::vector<ResilienceRow> rows;
  rows.reserve(labeled_graphs.size());
  for (const auto& [label, graph] : labeled_graphs) {
    ResilienceRow row;
    row.label = label;
    row.vertex_count = graph.vertex_count();
    row.edge_count = graph.edge_count();
    try {
      PercolationCurve curve = percolation_curve(graph, cfg);
      row.threshold = percolation_threshold(curve);
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string to_curve_csv(const PercolationCurve& curve) {
  std::string out = "p,ps,chi\n";
  for (std::size_t i = 0; i < curve.removal_fraction.size(); ++i) {
    out += csv::format_double(curve.removal_fraction[i]) + "," +
           csv::format_double(curve.strength[i]) + "," +
           csv::format_double(curve.susceptibility[i]) + "\n";
  }
  return out;
}

inline std::string to_report_csv(const std::vector<ResilienceRow>& rows,
                                 const PercolationConfig& cfg) {
  std::string out = "label,rho_c,V,E,X,normalization,cluster_statistic,seed\n";
  for (const auto& row : rows) {
    out += row.label + "," + (row.ok ? csv::format_double(row.threshold) : "failed") +
           "," + std::to_string(row.vertex_count) + "," +
           std::to_string(row.edge_count) + "," + std::to_string(cfg.realizations) +
           "," + to_string(cfg.normalization) + "," +
           to_string(cfg.cluster_statistic) + "," + std::to_string(cfg.seed) + "\n";
  }
  return out;
}

}  // namespace gridshare::percolation

#endif  // GRIDSHARE_PERCOLATION_HPP
