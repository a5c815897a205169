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

#ifndef GRIDSHARE_GRAPHS_HPP
#define GRIDSHARE_GRAPHS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "gridshare/graph.hpp"

namespace gridshare::graphs {

class DegenerateSeriesError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Pearson correlation coefficient of two equal-length series (n >= 2),
/// clamped to [-1, 1]. Throws DegenerateSeriesError if either series has zero
/// variance.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("pearson: series length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("pearson: need at least 2 samples");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw DegenerateSeriesError("pearson: zero-variance series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Symmetric matrix of pairwise Pearson coefficients. Zero-variance series are
/// marked degenerate; their rows/columns (diagonal included) hold 0.
struct CorrelationMatrix {
  int size = 0;
  std::vector<double> values;     // row-major size*size
  std::vector<bool> degenerate;   // per series

  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * size + j]; }
};

inline CorrelationMatrix correlation_matrix(
    const std::vector<std::vector<double>>& series) {
  const int v = static_cast<int>(series.size());
  if (v < 2) throw std::invalid_argument("correlation_matrix: need at least 2 series");
  const std::size_t n = series[0].size();
  if (n < 2)
    throw std::invalid_argument("correlation_matrix: series must have length >= 2");
  for (const auto& s : series)
    if (s.size() != n)
      throw std::invalid_argument("correlation_matrix: series length mismatch");

  CorrelationMatrix m;
  m.size = v;
  m.values.assign(static_cast<std::size_t>(v) * v, 0.0);
  m.degenerate.assign(v, false);
  for (int i = 0; i < v; ++i) {
    double mean = 0;
    for (double x : series[i]) mean += x;
    mean /= static_cast<double>(n);
    double var = 0;
    for (double x : series[i]) var += (x - mean) * (x - mean);
    m.degenerate[i] = (var == 0.0);
  }
  for (int i = 0; i < v; ++i) {
    if (!m.degenerate[i]) m.values[static_cast<std::size_t>(i) * v + i] = 1.0;
    for (int j = i + 1; j < v; ++j) {
      double pc = 0.0;
      if (!m.degenerate[i] && !m.degenerate[j]) pc = pearson(series[i], series[j]);
      m.values[static_cast<std::size_t>(i) * v + j] = pc;
      m.values[static_cast<std::size_t>(j) * v + i] = pc;
    }
  }
  return m;
}

/// Thresholded correlation network: edge (i,j) iff |PC| >= threshold (or
/// PC >= threshold when use_absolute is false). Degenerate series become
/// isolated vertices; their indices are appended to *degenerate_out if given.
inline Graph correlation_network(const std::vector<std::vector<double>>& series,
                                 double threshold, bool use_absolute = true,
                                 std::vector<int>* degenerate_out = nullptr) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw std::invalid_argument("correlation threshold must be in [0,1]");
  CorrelationMatrix m = correlation_matrix(series);
  Graph g(m.size);
  for (int i = 0; i < m.size; ++i) {
    if (m.degenerate[i] && degenerate_out) degenerate_out->push_back(i);
    for (int j = i + 1; j < m.size; ++j) {
      if (m.degenerate[i] || m.degenerate[j]) continue;
      double pc = m.at(i, j);
      double score = use_absolute ? std::fabs(pc) : pc;
      if (score >= threshold) g.add_edge(i, j);
    }
  }
  return g;
}

namespace detail {

inline void check_visibility_inputs(std::span<const double> y,
                                    std::span<const double> x) {
  if (y.empty()) throw std::invalid_argument("visibility graph: empty series");
  if (!x.empty()) {
    if (x.size() != y.size())
      throw std::invalid_argument("visibility graph: x/y length mismatch");
    for (std::size_t i = 1; i < x.size(); ++i)
      if (!(x[i] > x[i - 1]))
        throw std::invalid_argument("visibility graph: x must be strictly increasing");
  }
}

inline double x_at(std::span<const double> x, std::size_t i) {
  return x.empty() ? static_cast<double>(i) : x[i];
}

}  // namespace detail

/// Natural visibility graph: vertices follow the sample order; (i,j) are
/// adjacent iff every intermediate sample lies strictly below the chord
/// between them. Consecutive samples always see each other. O(n^2) sweep that
/// keeps the maximum blocking slope seen so far:  j is visible from i iff
/// slope(i,j) exceeds max_{i<k<j} slope(i,k).
inline Graph visibility_graph(std::span<const double> y,
                              std::span<const double> x = {}) {
  detail::check_visibility_inputs(y, x);
  const std::size_t n = y.size();
  Graph g(static_cast<int>(n));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double max_slope = -std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < n; ++j) {
      double slope =
          (y[j] - y[i]) / (detail::x_at(x, j) - detail::x_at(x, i));
      if (j == i + 1 || slope > max_slope)
        g.add_edge(static_cast<int>(i), static_cast<int>(j));
      max_slope = std::max(max_slope, slope);
    }
  }
  return g;
}

/// Literal triple-loop evaluation of the visibility criterion; test oracle.
inline Graph visibility_graph_bruteforce(std::span<const double> y,
                                         std::span<const double> x = {}) {
  detail::check_visibility_inputs(y, x);
  const std::size_t n = y.size();
  Graph g(static_cast<int>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      bool visible = true;
      for (std::size_t k = i + 1; k < j && visible; ++k) {
        double xi = detail::x_at(x, i), xj = detail::x_at(x, j),
               xk = detail::x_at(x, k);
        double line = y[j] + (y[i] - y[j]) * (xj - xk) / (xj - xi);
        if (!(y[k] < line)) visible = false;
      }
      if (visible) g.add_edge(static_cast<int>(i), static_cast<int>(j));
    }
  }
  return g;
}

}  // namespace gridshare::graphs

#endif  // GRIDSHARE_GRAPHS_HPP
