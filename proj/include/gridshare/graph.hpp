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

#ifndef GRIDSHARE_GRAPH_HPP
#define GRIDSHARE_GRAPH_HPP

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gridshare/csv.hpp"
#include "gridshare/union_find.hpp"

namespace gridshare::graphs {

/// Undirected simple graph. Edges are stored normalized (smaller endpoint
/// first) in insertion order; no self-loops, no duplicates.
class Graph {
 public:
  explicit Graph(int vertex_count) : vertex_count_(vertex_count) {
    if (vertex_count < 0) throw std::invalid_argument("vertex count must be >= 0");
  }

  void add_edge(int u, int v) {
    if (u < 0 || v < 0 || u >= vertex_count_ || v >= vertex_count_)
      throw std::invalid_argument("edge endpoint out of range");
    if (u == v) throw std::invalid_argument("self-loops are not allowed");
    if (u > v) std::swap(u, v);
    std::uint64_t key =
        static_cast<std::uint64_t>(u) * static_cast<std::uint64_t>(vertex_count_) + v;
    if (!edge_keys_.insert(key).second)
      throw std::invalid_argument("duplicate edge");
    edges_.emplace_back(u, v);
  }

  bool has_edge(int u, int v) const {
    if (u == v || u < 0 || v < 0 || u >= vertex_count_ || v >= vertex_count_)
      return false;
    if (u > v) std::swap(u, v);
    return edge_keys_.count(
               static_cast<std::uint64_t>(u) * static_cast<std::uint64_t>(vertex_count_) +
               v) > 0;
  }

  int vertex_count() const { return vertex_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  bool connected() const {
    if (vertex_count_ <= 1) return true;
    UnionFind uf(vertex_count_);
    for (auto [u, v] : edges_) uf.unite(u, v);
    return uf.component_count() == 1;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    if (a.vertex_count_ != b.vertex_count_ || a.edges_.size() != b.edges_.size())
      return false;
    for (auto [u, v] : a.edges_)
      if (!b.has_edge(u, v)) return false;
    return true;
  }
  friend bool operator!=(const Graph& a, const Graph& b) { return !(a == b); }

  /// Edge-list CSV: "# vertices=<V>" comment, then a u,v header and rows.
  std::string to_csv() const {
    std::string out = "# vertices=" + std::to_string(vertex_count_) + "\nu,v\n";
    for (auto [u, v] : edges_)
      out += std::to_string(u) + "," + std::to_string(v) + "\n";
    return out;
  }

  static Graph from_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty graph csv");
    const std::string prefix = "# vertices=";
    std::string trimmed = csv::trim(line);
    if (trimmed.rfind(prefix, 0) != 0)
      throw std::runtime_error("graph csv must start with '# vertices=<V>'");
    Graph g(static_cast<int>(
        csv::parse_int(trimmed.substr(prefix.size()), "graph csv vertex count")));
    if (!std::getline(in, line) || csv::trim(line) != "u,v")
      throw std::runtime_error("graph csv missing 'u,v' header");
    std::size_t line_no = 2;
    while (std::getline(in, line)) {
      ++line_no;
      std::string t = csv::trim(line);
      if (t.empty()) continue;
      auto fields = csv::split_line(t);
      std::string ctx = "graph csv line " + std::to_string(line_no);
      if (fields.size() != 2) throw std::runtime_error(ctx + ": expected u,v");
      g.add_edge(static_cast<int>(csv::parse_int(fields[0], ctx)),
                 static_cast<int>(csv::parse_int(fields[1], ctx)));
    }
    return g;
  }

 private:
  int vertex_count_;
  std::vector<std::pair<int, int>> edges_;
  std::unordered_set<std::uint64_t> edge_keys_;
};

}  // namespace gridshare::graphs

#endif  // GRIDSHARE_GRAPH_HPP
