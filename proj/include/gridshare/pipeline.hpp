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

#ifndef GRIDSHARE_PIPELINE_HPP
#define GRIDSHARE_PIPELINE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridshare/billing.hpp"
#include "gridshare/coalition.hpp"
#include "gridshare/csv.hpp"
#include "gridshare/feeder.hpp"
#include "gridshare/graphs.hpp"
#include "gridshare/percolation.hpp"
#include "gridshare/profiles.hpp"
#include "gridshare/rng.hpp"

namespace gridshare::pipeline {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class InputMode { synth, csv };
enum class ResilienceVariant { with_der, without_der, both };
enum class SeriesGranularity { interval, daily };

struct RunConfig {
  std::uint64_t seed = 0;
  fs::path output_dir = "out";

  InputMode input_mode = InputMode::synth;
  int synth_houses = 48;
  int synth_days = 365;
  profiles::SynthParams synth_params;
  fs::path interval_csv;
  fs::path assets_csv;

  int peak_start_hour = 8;
  int peak_end_hour = 20;

  double peak_buy_cents = 54.0;
  double offpeak_buy_cents = 22.0;
  double peak_sell_cents = 30.0;
  double offpeak_sell_cents = 13.0;
  double storage_amortization_cents = 0.0;
  double panel_amortization_cents = 0.0;
  bool include_amortization = false;

  double correlation_threshold = 0.7;
  bool abs_correlation = true;

  int percolation_realizations = 200;
  int percolation_grid_points = 41;
  percolation::Normalization percolation_normalization =
      percolation::Normalization::paper;
  percolation::ClusterStatistic percolation_statistic =
      percolation::ClusterStatistic::largest;

  fs::path feeder_asset_dir;
  std::string switch_configuration = "default";

  ResilienceVariant resilience_variant = ResilienceVariant::both;

  std::string selected_microgrid = "auto";
  std::string savings_denominator = "without_sharing";  // or without_der

  SeriesGranularity compare_series = SeriesGranularity::interval;

  billing::Tariff tariff() const {
    return billing::Tariff(peak_buy_cents, offpeak_buy_cents, peak_sell_cents,
                           offpeak_sell_cents, storage_amortization_cents,
                           panel_amortization_cents);
  }
  profiles::PeriodSpec period() const {
    return profiles::PeriodSpec(peak_start_hour, peak_end_hour);
  }
  percolation::PercolationConfig percolation_config(std::uint64_t stream_seed) const {
    percolation::PercolationConfig cfg;
    cfg.realizations = percolation_realizations;
    cfg.removal_fractions =
        percolation::PercolationConfig::uniform_grid(percolation_grid_points);
    cfg.seed = stream_seed;
    cfg.normalization = percolation_normalization;
    cfg.cluster_statistic = percolation_statistic;
    return cfg;
  }

  static RunConfig from_json_file(const fs::path& path);
};

namespace detail {

inline void require_keys(const nlohmann::json& j, const std::string& where,
                         std::initializer_list<const char*> known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok)
      throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
  }
}

inline fs::path resolve_path(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace detail

inline RunConfig RunConfig::from_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: " + path.string() + ": " + e.what());
  }
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");

  RunConfig cfg;
  try {
    detail::require_keys(j, "top level",
                         {"seed", "output_dir", "input", "period", "tariff",
                          "correlation", "percolation", "feeder", "resilience",
                          "trade", "compare"});
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.output_dir = detail::resolve_path(base, j.value("output_dir", "out"));

    if (j.contains("input")) {
      const auto& in_j = j.at("input");
      detail::require_keys(in_j, "input",
                           {"mode", "synth", "interval_csv", "assets_csv"});
      std::string mode = in_j.value("mode", "synth");
      if (mode == "synth") {
        cfg.input_mode = InputMode::synth;
      } else if (mode == "csv") {
        cfg.input_mode = InputMode::csv;
      } else {
        throw std::invalid_argument("config: input.mode must be synth or csv");
      }
      if (in_j.contains("synth")) {
        const auto& s = in_j.at("synth");
        detail::require_keys(
            s, "input.synth",
            {"houses", "days", "start_date", "floor_area_min_m2",
             "floor_area_max_m2", "panel_area_fraction", "storage_min_kwh",
             "storage_max_kwh", "base_daily_load_kwh", "load_area_exponent",
             "appliance_factor_min", "appliance_factor_max",
             "load_season_amplitude", "solar_season_amplitude",
             "clear_sky_yield_kwh_per_m2", "cloud_max", "load_noise"});
        cfg.synth_houses = s.value("houses", cfg.synth_houses);
        cfg.synth_days = s.value("days", cfg.synth_days);
        if (s.contains("start_date")) {
          auto d = parse_date(s.at("start_date").get<std::string>());
          if (!d) throw std::invalid_argument("config: bad synth start_date");
          cfg.synth_params.start_date = *d;
        }
        auto& sp = cfg.synth_params;
        sp.floor_area_min_m2 = s.value("floor_area_min_m2", sp.floor_area_min_m2);
        sp.floor_area_max_m2 = s.value("floor_area_max_m2", sp.floor_area_max_m2);
        sp.panel_area_fraction = s.value("panel_area_fraction", sp.panel_area_fraction);
        sp.storage_min_kwh = s.value("storage_min_kwh", sp.storage_min_kwh);
        sp.storage_max_kwh = s.value("storage_max_kwh", sp.storage_max_kwh);
        sp.base_daily_load_kwh = s.value("base_daily_load_kwh", sp.base_daily_load_kwh);
        sp.load_area_exponent = s.value("load_area_exponent", sp.load_area_exponent);
        sp.appliance_factor_min = s.value("appliance_factor_min", sp.appliance_factor_min);
        sp.appliance_factor_max = s.value("appliance_factor_max", sp.appliance_factor_max);
        sp.load_season_amplitude = s.value("load_season_amplitude", sp.load_season_amplitude);
        sp.solar_season_amplitude =
            s.value("solar_season_amplitude", sp.solar_season_amplitude);
        sp.clear_sky_yield_kwh_per_m2 =
            s.value("clear_sky_yield_kwh_per_m2", sp.clear_sky_yield_kwh_per_m2);
        sp.cloud_max = s.value("cloud_max", sp.cloud_max);
        sp.load_noise = s.value("load_noise", sp.load_noise);
      }
      if (in_j.contains("interval_csv"))
        cfg.interval_csv =
            detail::resolve_path(base, in_j.at("interval_csv").get<std::string>());
      if (in_j.contains("assets_csv"))
        cfg.assets_csv =
            detail::resolve_path(base, in_j.at("assets_csv").get<std::string>());
      if (cfg.input_mode == InputMode::csv &&
          (cfg.interval_csv.empty() || cfg.assets_csv.empty()))
        throw std::invalid_argument(
            "config: csv input needs interval_csv and assets_csv");
    }

    if (j.contains("period")) {
      const auto& p = j.at("period");
      detail::require_keys(p, "period", {"peak_start_hour", "peak_end_hour"});
      cfg.peak_start_hour = p.value("peak_start_hour", cfg.peak_start_hour);
      cfg.peak_end_hour = p.value("peak_end_hour", cfg.peak_end_hour);
    }

    if (j.contains("tariff")) {
      const auto& t = j.at("tariff");
      detail::require_keys(t, "tariff",
                           {"peak_buy", "offpeak_buy", "peak_sell", "offpeak_sell",
                            "storage_amortization", "panel_amortization",
                            "include_amortization"});
      cfg.peak_buy_cents = t.value("peak_buy", cfg.peak_buy_cents);
      cfg.offpeak_buy_cents = t.value("offpeak_buy", cfg.offpeak_buy_cents);
      cfg.peak_sell_cents = t.value("peak_sell", cfg.peak_sell_cents);
      cfg.offpeak_sell_cents = t.value("offpeak_sell", cfg.offpeak_sell_cents);
      cfg.storage_amortization_cents =
          t.value("storage_amortization", cfg.storage_amortization_cents);
      cfg.panel_amortization_cents =
          t.value("panel_amortization", cfg.panel_amortization_cents);
      cfg.include_amortization = t.value("include_amortization", cfg.include_amortization);
    }

    if (j.contains("correlation")) {
      const auto& c = j.at("correlation");
      detail::require_keys(c, "correlation", {"threshold", "abs_correlation"});
      cfg.correlation_threshold = c.value("threshold", cfg.correlation_threshold);
      cfg.abs_correlation = c.value("abs_correlation", cfg.abs_correlation);
    }

    if (j.contains("percolation")) {
      const auto& p = j.at("percolation");
      detail::require_keys(p, "percolation",
                           {"realizations", "grid_points", "normalization",
                            "cluster_statistic"});
      cfg.percolation_realizations = p.value("realizations", cfg.percolation_realizations);
      cfg.percolation_grid_points = p.value("grid_points", cfg.percolation_grid_points);
      std::string norm = p.value("normalization", std::string("paper"));
      if (norm == "paper") {
        cfg.percolation_normalization = percolation::Normalization::paper;
      } else if (norm == "standard") {
        cfg.percolation_normalization = percolation::Normalization::standard;
      } else {
        throw std::invalid_argument(
            "config: percolation.normalization must be paper or standard");
      }
      std::string stat = p.value("cluster_statistic", std::string("largest"));
      if (stat == "largest") {
        cfg.percolation_statistic = percolation::ClusterStatistic::largest;
      } else if (stat == "smallest_surviving") {
        cfg.percolation_statistic = percolation::ClusterStatistic::smallest_surviving;
      } else {
        throw std::invalid_argument(
            "config: percolation.cluster_statistic must be largest or smallest_surviving");
      }
    }

    if (j.contains("feeder")) {
      const auto& f = j.at("feeder");
      detail::require_keys(f, "feeder", {"asset_dir", "configuration"});
      if (f.contains("asset_dir"))
        cfg.feeder_asset_dir =
            detail::resolve_path(base, f.at("asset_dir").get<std::string>());
      cfg.switch_configuration = f.value("configuration", cfg.switch_configuration);
    }

    if (j.contains("resilience")) {
      const auto& r = j.at("resilience");
      detail::require_keys(r, "resilience", {"variant"});
      std::string v = r.value("variant", std::string("both"));
      if (v == "with_der") {
        cfg.resilience_variant = ResilienceVariant::with_der;
      } else if (v == "without_der") {
        cfg.resilience_variant = ResilienceVariant::without_der;
      } else if (v == "both") {
        cfg.resilience_variant = ResilienceVariant::both;
      } else {
        throw std::invalid_argument(
            "config: resilience.variant must be with_der, without_der or both");
      }
    }

    if (j.contains("trade")) {
      const auto& t = j.at("trade");
      detail::require_keys(t, "trade", {"microgrid", "savings_denominator"});
      cfg.selected_microgrid = t.value("microgrid", cfg.selected_microgrid);
      cfg.savings_denominator = t.value("savings_denominator", cfg.savings_denominator);
      if (cfg.savings_denominator != "without_sharing" &&
          cfg.savings_denominator != "without_der")
        throw std::invalid_argument(
            "config: trade.savings_denominator must be without_sharing or without_der");
    }

    if (j.contains("compare")) {
      const auto& c = j.at("compare");
      detail::require_keys(c, "compare", {"series"});
      std::string s = c.value("series", std::string("interval"));
      if (s == "interval") {
        cfg.compare_series = SeriesGranularity::interval;
      } else if (s == "daily") {
        cfg.compare_series = SeriesGranularity::daily;
      } else {
        throw std::invalid_argument("config: compare.series must be interval or daily");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: " + path.string() + ": " + e.what());
  }

  cfg.tariff();   // validate pricing conditions now
  cfg.period();   // validate the peak window
  return cfg;
}

// ---------------------------------------------------------------------------
// Dataset loading
// ---------------------------------------------------------------------------

struct Dataset {
  profiles::ProfileData profile;
  std::vector<profiles::HouseDay> house_days;
};

inline Dataset load_dataset(const RunConfig& cfg) {
  Dataset ds;
  if (cfg.input_mode == InputMode::synth) {
    ds.profile = profiles::synthesize_profiles(cfg.synth_houses, cfg.synth_days,
                                               cfg.seed, cfg.synth_params);
  } else {
    ds.profile = profiles::ingest_csv(cfg.interval_csv.string(), cfg.assets_csv.string());
  }
  ds.house_days = profiles::aggregate_daily(ds.profile.records, ds.profile.assets,
                                            cfg.period());
  return ds;
}

// ---------------------------------------------------------------------------
// partition subcommand
// ---------------------------------------------------------------------------

struct PartitionResult {
  feeder::FeederTopology topology;
  feeder::Partition partition;
  std::vector<std::string> labels;  // MG-1..MG-k in block order
};

inline PartitionResult compute_partition(const RunConfig& cfg) {
  if (cfg.feeder_asset_dir.empty())
    throw std::invalid_argument("config: feeder.asset_dir is required");
  feeder::FeederTopology topology = feeder::load_topology(cfg.feeder_asset_dir);
  feeder::SwitchStates states =
      feeder::load_switch_states(cfg.feeder_asset_dir, cfg.switch_configuration);
  feeder::Partition part = feeder::partition(topology, states);
  PartitionResult result{std::move(topology), std::move(part), {}};
  for (std::size_t i = 0; i < result.partition.blocks.size(); ++i)
    result.labels.push_back("MG-" + std::to_string(i + 1));
  return result;
}

inline PartitionResult cmd_partition(const RunConfig& cfg) {
  PartitionResult result = compute_partition(cfg);
  csv::write_file_atomic(cfg.output_dir / "partition.csv",
                         feeder::to_partition_csv(result.partition, result.labels));
  return result;
}

// ---------------------------------------------------------------------------
// resilience subcommand
// ---------------------------------------------------------------------------

struct ResilienceEntry {
  std::string block;
  std::string variant;  // with_der | without_der
  int house_count = 0;
  int vertex_count = 0;
  int edge_count = 0;
  std::string status;  // ok | skipped: ... | failed: ...
  double threshold = 0.0;
  bool most_resilient = false;
};

namespace detail {

/// Per-house 4-hour net real-power series over the full span, ordered by
/// (date, hour). without_der is the raw load; with_der subtracts solar and
/// applies the uniform storage dispatch (discharge capacity/n over peak
/// intervals, recharge capacity/n over off-peak intervals).
struct HouseSeries {
  std::vector<double> with_der;
  std::vector<double> without_der;
};

inline std::map<std::string, HouseSeries> build_house_series(
    const profiles::ProfileData& profile, const profiles::PeriodSpec& period,
    const std::set<std::string>& houses) {
  std::map<std::string, double> storage;
  for (const auto& a : profile.assets) storage[a.house_id] = a.storage_kwh;

  std::map<std::string, HouseSeries> series;
  std::set<std::pair<std::int64_t, int>> timeline;
  for (const auto& rec : profile.records) {
    if (!houses.count(rec.house_id)) continue;
    timeline.insert({to_serial_day(rec.date), rec.start_hour});
  }
  std::map<std::pair<std::int64_t, int>, std::size_t> slot;
  std::size_t idx = 0;
  for (const auto& key : timeline) slot[key] = idx++;

  for (const auto& id : houses) {
    series[id].with_der.assign(timeline.size(), 0.0);
    series[id].without_der.assign(timeline.size(), 0.0);
  }
  const double peak_n = period.peak_interval_count();
  const double off_n = period.offpeak_interval_count();
  for (const auto& rec : profile.records) {
    auto it = series.find(rec.house_id);
    if (it == series.end()) continue;
    std::size_t i = slot.at({to_serial_day(rec.date), rec.start_hour});
    double b = storage.at(rec.house_id);
    double dispatch = period.is_peak(rec.start_hour) ? -b / peak_n : b / off_n;
    it->second.without_der[i] = rec.load_kwh;
    it->second.with_der[i] = rec.load_kwh - rec.solar_kwh + dispatch;
  }
  return series;
}

inline std::map<std::string, std::vector<std::string>> houses_by_block(
    const PartitionResult& part, const std::map<std::string, std::string>& house_map,
    const std::set<std::string>& known_houses) {
  std::map<std::string, std::set<std::string>> node_to_block;
  std::map<std::string, std::vector<std::string>> result;
  std::map<std::string, std::string> node_block;
  for (std::size_t i = 0; i < part.partition.blocks.size(); ++i)
    for (const auto& node : part.partition.blocks[i])
      node_block[node] = part.labels[i];
  for (const auto& [house, node] : house_map) {
    if (!known_houses.count(house)) continue;
    auto it = node_block.find(node);
    if (it == node_block.end())
      throw std::runtime_error("house " + house + " is attached to unknown node " + node);
    result[it->second].push_back(house);
  }
  for (auto& [label, list] : result) std::sort(list.begin(), list.end());
  return result;
}

}  // namespace detail

inline std::vector<ResilienceEntry> compute_resilience(const RunConfig& cfg,
                                                       const Dataset& ds,
                                                       const PartitionResult& part) {
  std::map<std::string, std::string> house_map =
      feeder::load_house_map(cfg.feeder_asset_dir);
  std::set<std::string> known;
  for (const auto& a : ds.profile.assets) known.insert(a.house_id);
  auto blocks = detail::houses_by_block(part, house_map, known);

  std::set<std::string> mapped;
  for (const auto& [label, houses] : blocks)
    mapped.insert(houses.begin(), houses.end());
  auto series = detail::build_house_series(ds.profile, cfg.period(), mapped);

  std::vector<std::string> variants;
  if (cfg.resilience_variant != ResilienceVariant::without_der)
    variants.push_back("with_der");
  if (cfg.resilience_variant != ResilienceVariant::with_der)
    variants.push_back("without_der");

  std::vector<ResilienceEntry> rows;
  for (std::size_t bi = 0; bi < part.partition.blocks.size(); ++bi) {
    const std::string& label = part.labels[bi];
    auto it = blocks.find(label);
    const std::vector<std::string> houses =
        it == blocks.end() ? std::vector<std::string>{} : it->second;
    for (const auto& variant : variants) {
      ResilienceEntry row;
      row.block = label;
      row.variant = variant;
      row.house_count = static_cast<int>(houses.size());
      if (houses.size() < 2) {
        row.status = "skipped: fewer than 2 houses";
        rows.push_back(std::move(row));
        continue;
      }
      std::vector<std::vector<double>> block_series;
      for (const auto& id : houses) {
        const auto& h = series.at(id);
        block_series.push_back(variant == "with_der" ? h.with_der : h.without_der);
      }
      try {
        graphs::Graph g = graphs::correlation_network(
            block_series, cfg.correlation_threshold, cfg.abs_correlation);
        row.vertex_count = g.vertex_count();
        row.edge_count = g.edge_count();
        auto pcfg = cfg.percolation_config(
            mix_seed(cfg.seed, fnv1a64(label + "/" + variant)));
        percolation::PercolationCurve curve = percolation::percolation_curve(g, pcfg);
        row.threshold = percolation::percolation_threshold(curve);
        row.status = "ok";
      } catch (const std::exception& e) {
        row.status = std::string("failed: ") + e.what();
      }
      rows.push_back(std::move(row));
    }
  }

  // flag the most resilient block, judged on with-DER rows when available
  for (const auto& preferred : {std::string("with_der"), std::string("without_der")}) {
    const ResilienceEntry* best = nullptr;
    for (const auto& row : rows)
      if (row.variant == preferred && row.status == "ok" &&
          (!best || row.threshold > best->threshold))
        best = &row;
    if (best) {
      for (auto& row : rows)
        row.most_resilient = (row.block == best->block && row.variant == preferred);
      break;
    }
  }
  return rows;
}

inline std::string to_resilience_csv(const std::vector<ResilienceEntry>& rows) {
  std::string out = "block,variant,houses,V,E,rho_c,status,most_resilient\n";
  for (const auto& r : rows) {
    out += r.block + "," + r.variant + "," + std::to_string(r.house_count) + "," +
           std::to_string(r.vertex_count) + "," + std::to_string(r.edge_count) + "," +
           (r.status == "ok" ? csv::format_double(r.threshold) : "") + "," + r.status +
           "," + (r.most_resilient ? "true" : "false") + "\n";
  }
  return out;
}

inline std::vector<ResilienceEntry> cmd_resilience(const RunConfig& cfg) {
  Dataset ds = load_dataset(cfg);
  PartitionResult part = compute_partition(cfg);
  auto rows = compute_resilience(cfg, ds, part);
  csv::write_file_atomic(cfg.output_dir / "resilience.csv", to_resilience_csv(rows));

  // percolation-module report format for the ok rows
  std::vector<percolation::ResilienceRow> report;
  for (const auto& r : rows) {
    if (r.status != "ok") continue;
    percolation::ResilienceRow pr;
    pr.label = r.block + "/" + r.variant;
    pr.ok = true;
    pr.threshold = r.threshold;
    pr.vertex_count = r.vertex_count;
    pr.edge_count = r.edge_count;
    report.push_back(pr);
  }
  csv::write_file_atomic(
      cfg.output_dir / "percolation_report.csv",
      percolation::to_report_csv(report, cfg.percolation_config(cfg.seed)));
  return rows;
}

// ---------------------------------------------------------------------------
// trade subcommand
// ---------------------------------------------------------------------------

struct HouseTotals {
  std::string house_id;
  Money without_der;
  Money without_sharing;
  Money with_sharing;

  Money savings() const { return without_sharing - with_sharing; }
};

struct MonthTotals {
  int year = 0;
  int month = 0;
  Money without_der;
  Money without_sharing;
  Money with_sharing;

  Money savings() const { return without_sharing - with_sharing; }
};

struct SavingsReport {
  std::string microgrid;
  std::vector<HouseTotals> houses;   // sorted by house id
  std::vector<MonthTotals> months;   // chronological
  Money total_without_der;
  Money total_without_sharing;
  Money total_with_sharing;

  Money total_savings() const { return total_without_sharing - total_with_sharing; }

  /// Internal consistency; violations are programming errors.
  void validate() const {
    Money hw, hws, hs;
    for (const auto& h : houses) {
      hw += h.without_der;
      hws += h.without_sharing;
      hs += h.with_sharing;
    }
    Money mw, mws, ms;
    for (const auto& m : months) {
      mw += m.without_der;
      mws += m.without_sharing;
      ms += m.with_sharing;
    }
    if (hw != total_without_der || hws != total_without_sharing ||
        hs != total_with_sharing || mw != total_without_der ||
        mws != total_without_sharing || ms != total_with_sharing)
      throw std::logic_error("savings report does not reconcile");
  }
};

inline double percent(Money part, Money denom) {
  if (denom.units() == 0) return 0.0;
  return 100.0 * static_cast<double>(part.units()) / static_cast<double>(denom.units());
}

struct TradeResult {
  SavingsReport report;
  std::vector<double> import_series_individual;  // visibility-analysis series
  std::vector<double> import_series_coalition;
  double import_total_individual_kwh = 0.0;  // period-level yearly totals
  double import_total_coalition_kwh = 0.0;
  std::string microgrid;
};

namespace detail {

/// Grid import at 4-hour resolution for the visibility series. Storage is
/// spread uniformly over each period's intervals; the clamp to zero applies
/// per house (individual) or per pooled network (coalition).
struct IntervalImportPoint {
  std::int64_t serial_day = 0;
  int hour = 0;
  double individual = 0.0;
  double coalition = 0.0;
};

inline std::vector<IntervalImportPoint> interval_import_series(
    const profiles::ProfileData& profile, const profiles::PeriodSpec& period,
    const std::set<std::string>& houses) {
  std::map<std::string, double> storage;
  for (const auto& a : profile.assets) storage[a.house_id] = a.storage_kwh;
  const double peak_n = period.peak_interval_count();
  const double off_n = period.offpeak_interval_count();

  std::map<std::pair<std::int64_t, int>, std::pair<double, double>> acc;  // (sum+, sum)
  for (const auto& rec : profile.records) {
    if (!houses.count(rec.house_id)) continue;
    double b = storage.at(rec.house_id);
    double dispatch = period.is_peak(rec.start_hour) ? -b / peak_n : b / off_n;
    double net = rec.load_kwh - rec.solar_kwh + dispatch;
    auto& slot = acc[{to_serial_day(rec.date), rec.start_hour}];
    slot.first += std::max(net, 0.0);
    slot.second += net;
  }
  std::vector<IntervalImportPoint> out;
  out.reserve(acc.size());
  for (const auto& [key, sums] : acc) {
    IntervalImportPoint p;
    p.serial_day = key.first;
    p.hour = key.second;
    p.individual = sums.first;
    p.coalition = std::max(sums.second, 0.0);
    out.push_back(p);
  }
  return out;
}

}  // namespace detail

inline TradeResult compute_trade(const RunConfig& cfg, const Dataset& ds,
                                 const PartitionResult& part,
                                 const std::vector<ResilienceEntry>& resilience) {
  std::string microgrid = cfg.selected_microgrid;
  if (microgrid == "auto") {
    for (const auto& row : resilience)
      if (row.most_resilient) microgrid = row.block;
    if (microgrid == "auto")
      throw std::runtime_error(
          "no resilient microgrid could be selected (no block has >= 2 houses)");
  } else {
    bool known = false;
    for (const auto& label : part.labels)
      if (label == microgrid) known = true;
    if (!known)
      throw std::invalid_argument("trade.microgrid '" + microgrid +
                                  "' is not a partition block label");
  }

  std::map<std::string, std::string> house_map =
      feeder::load_house_map(cfg.feeder_asset_dir);
  std::set<std::string> known;
  for (const auto& a : ds.profile.assets) known.insert(a.house_id);
  auto blocks = detail::houses_by_block(part, house_map, known);
  auto bit = blocks.find(microgrid);
  if (bit == blocks.end() || bit->second.empty())
    throw std::runtime_error("microgrid " + microgrid + " has no houses");
  const std::vector<std::string>& member_ids = bit->second;
  std::set<std::string> member_set(member_ids.begin(), member_ids.end());

  // group the block's house-days by date
  std::map<std::int64_t, std::vector<profiles::HouseDay>> by_date;
  for (const auto& hd : ds.house_days)
    if (member_set.count(hd.house_id)) by_date[to_serial_day(hd.date)].push_back(hd);
  if (by_date.empty()) throw std::runtime_error("no house-day data for " + microgrid);
  for (const auto& [day, houses] : by_date) {
    if (houses.size() != member_ids.size())
      throw std::runtime_error("incomplete house coverage on " +
                               gridshare::to_string(from_serial_day(day)));
  }

  const billing::Tariff tariff = cfg.tariff();
  const bool amort = cfg.include_amortization;

  TradeResult result;
  result.microgrid = microgrid;
  result.report.microgrid = microgrid;
  std::map<std::string, HouseTotals> house_totals;
  for (const auto& id : member_ids) house_totals[id].house_id = id;
  std::map<std::pair<int, int>, MonthTotals> month_totals;

  std::vector<coalition::Allocation> allocations;
  std::vector<coalition::TradeLedger> ledgers;
  std::string import_csv = "date,period,individual_kwh,coalition_kwh\n";

  for (const auto& [day, houses] : by_date) {
    Date date = from_serial_day(day);
    coalition::CoalitionDay cd = coalition::CoalitionDay::from_members(houses);
    coalition::Allocation alloc = coalition::allocate(cd, houses, tariff, amort);
    auto& month = month_totals[{date.year, date.month}];
    month.year = date.year;
    month.month = date.month;

    for (std::size_t i = 0; i < houses.size(); ++i) {
      const auto& h = houses[i];
      Money w = billing::cost_without_der(h, tariff);
      Money ws = billing::cost_with_der(h, tariff, amort).cost;
      Money s = alloc.shares[i].second;
      auto& totals = house_totals[h.house_id];
      totals.without_der += w;
      totals.without_sharing += ws;
      totals.with_sharing += s;
      month.without_der += w;
      month.without_sharing += ws;
      month.with_sharing += s;
    }

    coalition::GridImport ind =
        coalition::grid_import(houses, coalition::ImportMode::individual);
    coalition::GridImport coal =
        coalition::grid_import(houses, coalition::ImportMode::coalition);
    result.import_total_individual_kwh += ind.peak_kwh + ind.offpeak_kwh;
    result.import_total_coalition_kwh += coal.peak_kwh + coal.offpeak_kwh;
    import_csv += gridshare::to_string(date) + ",peak," +
                  csv::format_fixed(ind.peak_kwh, 6) + "," +
                  csv::format_fixed(coal.peak_kwh, 6) + "\n";
    import_csv += gridshare::to_string(date) + ",off_peak," +
                  csv::format_fixed(ind.offpeak_kwh, 6) + "," +
                  csv::format_fixed(coal.offpeak_kwh, 6) + "\n";
    if (cfg.compare_series == SeriesGranularity::daily) {
      result.import_series_individual.push_back(ind.peak_kwh + ind.offpeak_kwh);
      result.import_series_coalition.push_back(coal.peak_kwh + coal.offpeak_kwh);
    }

    allocations.push_back(std::move(alloc));
    ledgers.push_back(coalition::match_trades(houses, tariff));
  }

  if (cfg.compare_series == SeriesGranularity::interval) {
    auto points = detail::interval_import_series(ds.profile, cfg.period(), member_set);
    for (const auto& p : points) {
      result.import_series_individual.push_back(p.individual);
      result.import_series_coalition.push_back(p.coalition);
    }
  }

  for (const auto& [id, totals] : house_totals) {
    result.report.houses.push_back(totals);
    result.report.total_without_der += totals.without_der;
    result.report.total_without_sharing += totals.without_sharing;
    result.report.total_with_sharing += totals.with_sharing;
  }
  for (const auto& [key, totals] : month_totals) result.report.months.push_back(totals);
  result.report.validate();

  // reports
  std::string houses_csv =
      "house_id,without_der_usd,without_sharing_usd,with_sharing_usd,savings_usd,"
      "savings_pct_vs_without_sharing,savings_pct_vs_without_der\n";
  for (const auto& h : result.report.houses) {
    houses_csv += h.house_id + "," + h.without_der.dollars_string() + "," +
                  h.without_sharing.dollars_string() + "," +
                  h.with_sharing.dollars_string() + "," + h.savings().dollars_string() +
                  "," + csv::format_fixed(percent(h.savings(), h.without_sharing), 2) +
                  "," + csv::format_fixed(percent(h.savings(), h.without_der), 2) + "\n";
  }

  auto quantile = [](std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    if (v.empty()) return 0.0;
    double h = q * (static_cast<double>(v.size()) - 1);
    std::size_t lo = static_cast<std::size_t>(h);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - lo) * (v[hi] - v[lo]);
  };
  std::vector<double> col_wd, col_ws, col_s, col_sav, col_pct;
  const bool pct_vs_without_der = cfg.savings_denominator == "without_der";
  for (const auto& h : result.report.houses) {
    col_wd.push_back(h.without_der.dollars());
    col_ws.push_back(h.without_sharing.dollars());
    col_s.push_back(h.with_sharing.dollars());
    col_sav.push_back(h.savings().dollars());
    col_pct.push_back(
        percent(h.savings(), pct_vs_without_der ? h.without_der : h.without_sharing));
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  std::string stats_csv =
      "statistic,without_der_usd,without_sharing_usd,with_sharing_usd,savings_usd,"
      "savings_pct\n";
  auto stat_row = [&](const std::string& name, double q, bool use_mean) {
    stats_csv += name;
    for (auto* col : {&col_wd, &col_ws, &col_s, &col_sav, &col_pct})
      stats_csv += "," + csv::format_fixed(use_mean ? mean(*col) : quantile(*col, q), 2);
    stats_csv += "\n";
  };
  stat_row("mean", 0, true);
  stat_row("minimum", 0.0, false);
  stat_row("first_quartile", 0.25, false);
  stat_row("median", 0.5, false);
  stat_row("third_quartile", 0.75, false);
  stat_row("maximum", 1.0, false);

  std::string monthly_csv =
      "month,without_der_usd,without_sharing_usd,with_sharing_usd,savings_usd,"
      "savings_pct\n";
  char month_buf[16];
  for (const auto& m : result.report.months) {
    std::snprintf(month_buf, sizeof(month_buf), "%04d-%02d", m.year, m.month);
    monthly_csv += std::string(month_buf) + "," + m.without_der.dollars_string() + "," +
                   m.without_sharing.dollars_string() + "," +
                   m.with_sharing.dollars_string() + "," +
                   m.savings().dollars_string() + "," +
                   csv::format_fixed(
                       percent(m.savings(), pct_vs_without_der ? m.without_der
                                                               : m.without_sharing),
                       2) +
                   "\n";
  }
  monthly_csv += "total," + result.report.total_without_der.dollars_string() + "," +
                 result.report.total_without_sharing.dollars_string() + "," +
                 result.report.total_with_sharing.dollars_string() + "," +
                 result.report.total_savings().dollars_string() + "," +
                 csv::format_fixed(
                     percent(result.report.total_savings(),
                             pct_vs_without_der ? result.report.total_without_der
                                                : result.report.total_without_sharing),
                     2) +
                 "\n";

  auto series_csv = [](const std::vector<double>& series) {
    std::string out = "t,kwh\n";
    for (std::size_t i = 0; i < series.size(); ++i)
      out += std::to_string(i) + "," + csv::format_fixed(series[i], 6) + "\n";
    return out;
  };

  csv::write_file_atomic(cfg.output_dir / "savings_houses.csv", houses_csv);
  csv::write_file_atomic(cfg.output_dir / "savings_stats.csv", stats_csv);
  csv::write_file_atomic(cfg.output_dir / "savings_monthly.csv", monthly_csv);
  csv::write_file_atomic(cfg.output_dir / "allocations.csv",
                         coalition::to_allocations_csv(allocations));
  csv::write_file_atomic(cfg.output_dir / "trades.csv",
                         coalition::to_ledger_csv(ledgers));
  csv::write_file_atomic(cfg.output_dir / "grid_import_periods.csv", import_csv);
  csv::write_file_atomic(cfg.output_dir / "grid_import_without_sharing.csv",
                         series_csv(result.import_series_individual));
  csv::write_file_atomic(cfg.output_dir / "grid_import_with_sharing.csv",
                         series_csv(result.import_series_coalition));
  return result;
}

inline TradeResult cmd_trade(const RunConfig& cfg) {
  Dataset ds = load_dataset(cfg);
  PartitionResult part = compute_partition(cfg);
  auto resilience = compute_resilience(cfg, ds, part);
  return compute_trade(cfg, ds, part, resilience);
}

// ---------------------------------------------------------------------------
// compare subcommand
// ---------------------------------------------------------------------------

struct CompareRow {
  std::string label;          // without_p2p | with_p2p
  double total_kwh = 0.0;
  std::string status;         // ok | degenerate: ...
  double threshold = 0.0;
};

struct CompareResult {
  std::vector<CompareRow> rows;
  double delta = 0.0;        // with - without
  double pct_improvement = 0.0;
};

namespace detail {

inline std::vector<double> read_series_csv(const fs::path& path) {
  csv::Table table = csv::read_file(path.string(), {"t", "kwh"});
  std::vector<double> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    std::string ctx = path.string() + ":" + std::to_string(row.line_number);
    out.push_back(csv::parse_double(row.fields[1], ctx));
  }
  return out;
}

}  // namespace detail

inline CompareResult compare_series(const RunConfig& cfg,
                                    const std::vector<double>& without_sharing,
                                    const std::vector<double>& with_sharing) {
  CompareResult result;
  struct Item {
    const char* label;
    const std::vector<double>* series;
  };
  for (const auto& item : {Item{"without_p2p", &without_sharing},
                           Item{"with_p2p", &with_sharing}}) {
    CompareRow row;
    row.label = item.label;
    for (double v : *item.series) row.total_kwh += v;
    if (item.series->empty()) {
      row.status = "degenerate: empty series";
    } else {
      auto [mn, mx] = std::minmax_element(item.series->begin(), item.series->end());
      if (*mn == *mx) {
        row.status = "degenerate: constant series";
      } else {
        graphs::Graph g = graphs::visibility_graph(*item.series);
        auto pcfg = cfg.percolation_config(
            mix_seed(cfg.seed, fnv1a64(std::string("compare/") + item.label)));
        try {
          percolation::PercolationCurve curve = percolation::percolation_curve(g, pcfg);
          row.threshold = percolation::percolation_threshold(curve);
          row.status = "ok";
          csv::write_file_atomic(cfg.output_dir /
                                     (std::string("percolation_curve_") + item.label +
                                      ".csv"),
                                 percolation::to_curve_csv(curve));
        } catch (const std::exception& e) {
          row.status = std::string("degenerate: ") + e.what();
        }
      }
    }
    result.rows.push_back(std::move(row));
  }

  const CompareRow& base = result.rows[0];
  const CompareRow& p2p = result.rows[1];
  if (base.status == "ok" && p2p.status == "ok") {
    result.delta = p2p.threshold - base.threshold;
    if (base.threshold != 0.0)
      result.pct_improvement = 100.0 * result.delta / base.threshold;
  }

  std::string out = "case,grid_energy_kwh,rho_c,delta,pct_improvement\n";
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& row = result.rows[i];
    out += row.label + "," + csv::format_fixed(row.total_kwh, 3) + "," +
           (row.status == "ok" ? csv::format_double(row.threshold)
                               : "(" + row.status + ")");
    if (i == 1 && base.status == "ok" && p2p.status == "ok") {
      out += "," + csv::format_double(result.delta) + "," +
             csv::format_fixed(result.pct_improvement, 2);
    } else {
      out += ",,";
    }
    out += "\n";
  }
  csv::write_file_atomic(cfg.output_dir / "resilience_compare.csv", out);
  return result;
}

inline CompareResult cmd_compare(const RunConfig& cfg) {
  fs::path without_path = cfg.output_dir / "grid_import_without_sharing.csv";
  fs::path with_path = cfg.output_dir / "grid_import_with_sharing.csv";
  if (!fs::exists(without_path) || !fs::exists(with_path))
    throw std::runtime_error(
        "grid-import series not found in output dir; run the trade step first");
  return compare_series(cfg, detail::read_series_csv(without_path),
                        detail::read_series_csv(with_path));
}

// ---------------------------------------------------------------------------
// all
// ---------------------------------------------------------------------------

struct PipelineResult {
  PartitionResult partition;
  std::vector<ResilienceEntry> resilience;
  TradeResult trade;
  CompareResult compare;
};

inline PipelineResult cmd_all(const RunConfig& cfg) {
  Dataset ds = load_dataset(cfg);
  PartitionResult part = cmd_partition(cfg);
  auto resilience = compute_resilience(cfg, ds, part);
  csv::write_file_atomic(cfg.output_dir / "resilience.csv",
                         to_resilience_csv(resilience));
  std::vector<percolation::ResilienceRow> report;
  for (const auto& r : resilience) {
    if (r.status != "ok") continue;
    percolation::ResilienceRow pr;
    pr.label = r.block + "/" + r.variant;
    pr.ok = true;
    pr.threshold = r.threshold;
    pr.vertex_count = r.vertex_count;
    pr.edge_count = r.edge_count;
    report.push_back(pr);
  }
  csv::write_file_atomic(
      cfg.output_dir / "percolation_report.csv",
      percolation::to_report_csv(report, cfg.percolation_config(cfg.seed)));

  TradeResult trade = compute_trade(cfg, ds, part, resilience);
  CompareResult compare = compare_series(cfg, trade.import_series_individual,
                                         trade.import_series_coalition);
  return PipelineResult{std::move(part), std::move(resilience), std::move(trade),
                        std::move(compare)};
}

}  // namespace gridshare::pipeline

#endif  // GRIDSHARE_PIPELINE_HPP
