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

#ifndef GRIDSHARE_FEEDER_HPP
#define GRIDSHARE_FEEDER_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gridshare/csv.hpp"
#include "gridshare/union_find.hpp"

namespace gridshare::feeder {

/// Orders node ids numerically when both parse as non-negative integers,
/// lexicographically otherwise (numeric ids sort before non-numeric).
inline bool node_id_less(const std::string& a, const std::string& b) {
  auto as_number = [](const std::string& s, std::int64_t& out) {
    if (s.empty() || s.size() > 18) return false;
    out = 0;
    for (char c : s) {
      if (c < '0' || c > '9') return false;
      out = out * 10 + (c - '0');
    }
    return true;
  };
  std::int64_t na = 0, nb = 0;
  bool ia = as_number(a, na), ib = as_number(b, nb);
  if (ia && ib) return na < nb;
  if (ia != ib) return ia;
  return a < b;
}

struct Switch {
  std::string label;
  std::string from;
  std::string to;
  bool normally_closed = false;
};

/// Distribution feeder: plain line segments plus labeled switches. Line and
/// switch endpoint pairs must all be distinct, endpoints known, no self-loops.
class FeederTopology {
 public:
  static FeederTopology create(std::vector<std::string> nodes,
                               std::vector<std::pair<std::string, std::string>> lines,
                               std::vector<Switch> switches) {
    FeederTopology t;
    for (auto& n : nodes) {
      if (n.empty()) throw std::invalid_argument("empty node id");
      if (!t.index_.emplace(n, static_cast<int>(t.nodes_.size())).second)
        throw std::invalid_argument("duplicate node id: " + n);
      t.nodes_.push_back(std::move(n));
    }
    std::set<std::pair<int, int>> seen_pairs;
    auto endpoint_pair = [&](const std::string& a, const std::string& b,
                             const std::string& what) {
      auto ia = t.index_.find(a);
      auto ib = t.index_.find(b);
      if (ia == t.index_.end())
        throw std::invalid_argument(what + " references unknown node: " + a);
      if (ib == t.index_.end())
        throw std::invalid_argument(what + " references unknown node: " + b);
      if (ia->second == ib->second)
        throw std::invalid_argument(what + " is a self-loop at node " + a);
      std::pair<int, int> p = std::minmax(ia->second, ib->second);
      if (!seen_pairs.insert(p).second)
        throw std::invalid_argument("duplicate edge pair " + a + "-" + b);
      return p;
    };
    for (const auto& [a, b] : lines) t.lines_.push_back(endpoint_pair(a, b, "line"));
    std::set<std::string> labels;
    for (auto& sw : switches) {
      if (sw.label.empty()) throw std::invalid_argument("switch label must be non-empty");
      if (!labels.insert(sw.label).second)
        throw std::invalid_argument("duplicate switch label: " + sw.label);
      t.switch_pairs_.push_back(endpoint_pair(sw.from, sw.to, "switch " + sw.label));
      t.switches_.push_back(std::move(sw));
    }
    return t;
  }

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<Switch>& switches() const { return switches_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  bool has_node(const std::string& id) const { return index_.count(id) > 0; }
  int node_index(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::invalid_argument("unknown node: " + id);
    return it->second;
  }

  const std::vector<std::pair<int, int>>& line_pairs() const { return lines_; }
  const std::vector<std::pair<int, int>>& switch_pairs() const { return switch_pairs_; }

 private:
  std::vector<std::string> nodes_;
  std::map<std::string, int> index_;
  std::vector<std::pair<int, int>> lines_;
  std::vector<Switch> switches_;
  std::vector<std::pair<int, int>> switch_pairs_;
};

using SwitchStates = std::map<std::string, bool>;  // label -> closed?

/// Node blocks induced by lines plus closed switches. Blocks and the nodes
/// inside them are ordered by node id (numeric-aware), so output is
/// deterministic.
struct Partition {
  std::vector<std::vector<std::string>> blocks;
  SwitchStates provenance;

  std::string block_signature() const {
    std::string sig;
    for (const auto& block : blocks) {
      for (const auto& n : block) sig += n + ",";
      sig += ";";
    }
    return sig;
  }
};

inline Partition partition(const FeederTopology& topology, const SwitchStates& states) {
  for (const auto& [label, closed] : states) {
    (void)closed;
    bool known = false;
    for (const auto& sw : topology.switches())
      if (sw.label == label) known = true;
    if (!known) throw std::invalid_argument("unknown switch label: " + label);
  }
  for (const auto& sw : topology.switches())
    if (!states.count(sw.label))
      throw std::invalid_argument("missing state for switch: " + sw.label);

  UnionFind uf(topology.node_count());
  for (auto [a, b] : topology.line_pairs()) uf.unite(a, b);
  for (std::size_t i = 0; i < topology.switches().size(); ++i) {
    if (states.at(topology.switches()[i].label)) {
      auto [a, b] = topology.switch_pairs()[i];
      uf.unite(a, b);
    }
  }

  std::map<int, std::vector<std::string>> by_root;
  for (int i = 0; i < topology.node_count(); ++i)
    by_root[uf.find(i)].push_back(topology.nodes()[i]);

  Partition part;
  part.provenance = states;
  for (auto& [root, block] : by_root) {
    (void)root;
    std::sort(block.begin(), block.end(), node_id_less);
    part.blocks.push_back(std::move(block));
  }
  std::sort(part.blocks.begin(), part.blocks.end(),
            [](const auto& a, const auto& b) { return node_id_less(a[0], b[0]); });
  return part;
}

/// All switch-state combinations (lexicographic, open before closed),
/// deduplicated by block structure, truncated at max_results. The first state
/// vector producing a block structure provides its provenance.
inline std::vector<Partition> enumerate_partitions(const FeederTopology& topology,
                                                   std::size_t max_results) {
  const std::size_t k = topology.switches().size();
  if (k > 24)
    throw std::invalid_argument("too many switches for exhaustive enumeration (max 24)");

  std::vector<Partition> out;
  std::set<std::string> seen;
  const std::uint64_t total = 1ULL << k;
  for (std::uint64_t v = 0; v < total && out.size() < max_results; ++v) {
    SwitchStates states;
    for (std::size_t j = 0; j < k; ++j) {
      bool closed = (v >> (k - 1 - j)) & 1ULL;  // first switch varies slowest
      states[topology.switches()[j].label] = closed;
    }
    Partition p = partition(topology, states);
    if (seen.insert(p.block_signature()).second) out.push_back(std::move(p));
  }
  return out;
}

/// Optional stand-in for the "self-sufficient" screening: keep partitions
/// where every block's attached houses generate at least min_fraction of
/// their consumption (yearly totals). Blocks without houses pass vacuously.
inline std::vector<Partition> filter_self_sufficient(
    const std::vector<Partition>& partitions,
    const std::map<std::string, std::string>& house_to_node,
    const std::map<std::string, std::pair<double, double>>& house_generation_consumption,
    double min_fraction) {
  if (!(min_fraction >= 0))
    throw std::invalid_argument("min_fraction must be non-negative");
  std::vector<Partition> kept;
  for (const auto& p : partitions) {
    bool all_ok = true;
    for (const auto& block : p.blocks) {
      std::set<std::string> block_nodes(block.begin(), block.end());
      double gen = 0, cons = 0;
      for (const auto& [house, node] : house_to_node) {
        if (!block_nodes.count(node)) continue;
        auto it = house_generation_consumption.find(house);
        if (it == house_generation_consumption.end())
          throw std::invalid_argument("no energy totals for house " + house);
        gen += it->second.first;
        cons += it->second.second;
      }
      if (gen < min_fraction * cons) {
        all_ok = false;
        break;
      }
    }
    if (all_ok) kept.push_back(p);
  }
  return kept;
}

// ---------------------------------------------------------------------------
// Asset files: nodes.csv (id), edges.csv (from,to,kind,label),
// switchstates[_name].csv (label,state), houses.csv (house_id,node_id).
// ---------------------------------------------------------------------------

inline FeederTopology load_topology(const std::filesystem::path& asset_dir) {
  csv::Table node_table = csv::read_file((asset_dir / "nodes.csv").string(), {"id"});
  std::vector<std::string> nodes;
  for (const auto& row : node_table.rows) nodes.push_back(row.fields[0]);

  csv::Table edge_table =
      csv::read_file((asset_dir / "edges.csv").string(), {"from", "to", "kind", "label"});
  std::vector<std::pair<std::string, std::string>> lines;
  std::vector<Switch> switches;
  for (const auto& row : edge_table.rows) {
    std::string ctx =
        (asset_dir / "edges.csv").string() + ":" + std::to_string(row.line_number);
    const std::string& kind = row.fields[2];
    if (kind == "line") {
      lines.emplace_back(row.fields[0], row.fields[1]);
    } else if (kind == "switch") {
      if (row.fields[3].empty())
        throw std::runtime_error(ctx + ": switch edge needs a label");
      switches.push_back(Switch{row.fields[3], row.fields[0], row.fields[1], false});
    } else {
      throw std::runtime_error(ctx + ": kind must be line or switch, got '" + kind + "'");
    }
  }
  return FeederTopology::create(std::move(nodes), std::move(lines), std::move(switches));
}

/// Loads the named switch configuration: switchstates.csv for the default,
/// switchstates_<name>.csv otherwise.
inline SwitchStates load_switch_states(const std::filesystem::path& asset_dir,
                                       const std::string& configuration = "") {
  std::string file = configuration.empty() || configuration == "default"
                         ? "switchstates.csv"
                         : "switchstates_" + configuration + ".csv";
  csv::Table table = csv::read_file((asset_dir / file).string(), {"label", "state"});
  SwitchStates states;
  for (const auto& row : table.rows) {
    std::string ctx = (asset_dir / file).string() + ":" + std::to_string(row.line_number);
    const std::string& state = row.fields[1];
    if (state != "open" && state != "closed")
      throw std::runtime_error(ctx + ": state must be open or closed");
    if (!states.emplace(row.fields[0], state == "closed").second)
      throw std::runtime_error(ctx + ": duplicate switch label " + row.fields[0]);
  }
  return states;
}

inline std::map<std::string, std::string> load_house_map(
    const std::filesystem::path& asset_dir) {
  csv::Table table =
      csv::read_file((asset_dir / "houses.csv").string(), {"house_id", "node_id"});
  std::map<std::string, std::string> map;
  for (const auto& row : table.rows) {
    std::string ctx =
        (asset_dir / "houses.csv").string() + ":" + std::to_string(row.line_number);
    if (!map.emplace(row.fields[0], row.fields[1]).second)
      throw std::runtime_error(ctx + ": duplicate house " + row.fields[0]);
  }
  return map;
}

inline std::string to_partition_csv(const Partition& p,
                                    const std::vector<std::string>& labels) {
  if (labels.size() != p.blocks.size())
    throw std::invalid_argument("label count must match block count");
  std::string out = "block,node_id\n";
  for (std::size_t i = 0; i < p.blocks.size(); ++i)
    for (const auto& node : p.blocks[i]) out += labels[i] + "," + node + "\n";
  return out;
}

}  // namespace gridshare::feeder

#endif  // GRIDSHARE_FEEDER_HPP
