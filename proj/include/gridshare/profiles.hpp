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

#ifndef GRIDSHARE_PROFILES_HPP
#define GRIDSHARE_PROFILES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridshare/csv.hpp"
#include "gridshare/dates.hpp"
#include "gridshare/money.hpp"
#include "gridshare/rng.hpp"

namespace gridshare::profiles {

inline constexpr int kIntervalHours = 4;
inline constexpr int kIntervalsPerDay = 24 / kIntervalHours;

/// One 4-hour metering interval of one household.
struct IntervalRecord {
  std::string house_id;
  Date date;
  int start_hour = 0;  // in {0, 4, 8, 12, 16, 20}
  double load_kwh = 0.0;
  double solar_kwh = 0.0;
};

inline IntervalRecord make_interval_record(std::string house_id, Date date,
                                           int start_hour, double load_kwh,
                                           double solar_kwh) {
  if (house_id.empty()) throw std::invalid_argument("house_id must be non-empty");
  if (!is_valid(date)) throw std::invalid_argument("invalid date");
  if (start_hour < 0 || start_hour >= 24 || start_hour % kIntervalHours != 0)
    throw std::invalid_argument("interval start hour must be one of 0,4,8,12,16,20");
  if (!std::isfinite(load_kwh) || load_kwh < 0)
    throw std::invalid_argument("load_kwh must be finite and non-negative");
  if (!std::isfinite(solar_kwh) || solar_kwh < 0)
    throw std::invalid_argument("solar_kwh must be finite and non-negative");
  return IntervalRecord{std::move(house_id), date, start_hour, snap_energy(load_kwh),
                        snap_energy(solar_kwh)};
}

struct HouseAssets {
  std::string house_id;
  double storage_kwh = 0.0;
  double panel_area_m2 = 0.0;
};

inline HouseAssets make_house_assets(std::string house_id, double storage_kwh,
                                     double panel_area_m2) {
  if (house_id.empty()) throw std::invalid_argument("house_id must be non-empty");
  if (!std::isfinite(storage_kwh) || storage_kwh < 0)
    throw std::invalid_argument("storage_kwh must be finite and non-negative");
  if (!std::isfinite(panel_area_m2) || panel_area_m2 < 0)
    throw std::invalid_argument("panel_area_m2 must be finite and non-negative");
  return HouseAssets{std::move(house_id), snap_energy(storage_kwh),
                     snap_energy(panel_area_m2)};
}

/// Daily peak/off-peak aggregates of one household plus its assets.
struct HouseDay {
  std::string house_id;
  Date date;
  double peak_load_kwh = 0.0;
  double offpeak_load_kwh = 0.0;
  double peak_solar_kwh = 0.0;
  double offpeak_solar_kwh = 0.0;
  double storage_kwh = 0.0;
  double panel_area_m2 = 0.0;
};

inline HouseDay make_house_day(std::string house_id, Date date, double peak_load,
                               double offpeak_load, double peak_solar,
                               double offpeak_solar, double storage_kwh,
                               double panel_area_m2) {
  for (double v : {peak_load, offpeak_load, peak_solar, offpeak_solar, storage_kwh,
                   panel_area_m2}) {
    if (!std::isfinite(v) || v < 0)
      throw std::invalid_argument("house-day fields must be finite and non-negative");
  }
  return HouseDay{std::move(house_id),    date,
                  snap_energy(peak_load), snap_energy(offpeak_load),
                  snap_energy(peak_solar), snap_energy(offpeak_solar),
                  snap_energy(storage_kwh), snap_energy(panel_area_m2)};
}

/// Daily peak window, half-open [start, end), aligned to 4-hour boundaries.
/// An interval belongs to the peak period iff its start hour lies inside the
/// window; both the peak and the off-peak side must be non-empty.
class PeriodSpec {
 public:
  PeriodSpec(int peak_start_hour, int peak_end_hour)
      : start_(peak_start_hour), end_(peak_end_hour) {
    if (start_ < 0 || start_ >= 24 || end_ <= 0 || end_ > 24 ||
        start_ % kIntervalHours != 0 || end_ % kIntervalHours != 0 || start_ >= end_)
      throw std::invalid_argument(
          "peak window must be a non-empty [start,end) on 4-hour boundaries");
    if (end_ - start_ >= 24)
      throw std::invalid_argument("off-peak side of the day must be non-empty");
  }

  int peak_start_hour() const { return start_; }
  int peak_end_hour() const { return end_; }
  bool is_peak(int interval_start_hour) const {
    return interval_start_hour >= start_ && interval_start_hour < end_;
  }
  int peak_interval_count() const { return (end_ - start_) / kIntervalHours; }
  int offpeak_interval_count() const {
    return kIntervalsPerDay - peak_interval_count();
  }

 private:
  int start_;
  int end_;
};

struct ProfileData {
  std::vector<IntervalRecord> records;  // sorted by (house_id, date, hour)
  std::vector<HouseAssets> assets;      // sorted by house_id
};

namespace detail {

inline std::string timestamp_string(const Date& d, int hour) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%sT%02d:00", gridshare::to_string(d).c_str(), hour);
  return buf;
}

inline void sort_records(std::vector<IntervalRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const IntervalRecord& a, const IntervalRecord& b) {
              if (a.house_id != b.house_id) return a.house_id < b.house_id;
              if (a.date != b.date) return a.date < b.date;
              return a.start_hour < b.start_hour;
            });
}

}  // namespace detail

/// Loads interval and asset CSVs (schemas: house_id,timestamp,load_kwh,solar_kwh
/// and house_id,storage_kwh,panel_area_m2). Timestamps look like
/// 2021-03-01T08:00 with the hour on a 4-hour boundary.
inline ProfileData ingest_csv(const std::string& interval_path,
                              const std::string& assets_path) {
  ProfileData data;

  csv::Table assets_table = csv::read_file(
      assets_path, {"house_id", "storage_kwh", "panel_area_m2"});
  std::set<std::string> asset_ids;
  for (const auto& row : assets_table.rows) {
    std::string ctx = assets_path + ":" + std::to_string(row.line_number);
    if (!asset_ids.insert(row.fields[0]).second)
      throw std::runtime_error(ctx + ": duplicate assets row for house '" +
                               row.fields[0] + "'");
    try {
      data.assets.push_back(make_house_assets(
          row.fields[0], csv::parse_double(row.fields[1], ctx),
          csv::parse_double(row.fields[2], ctx)));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(ctx + ": " + e.what());
    }
  }
  std::sort(data.assets.begin(), data.assets.end(),
            [](const HouseAssets& a, const HouseAssets& b) {
              return a.house_id < b.house_id;
            });

  csv::Table intervals = csv::read_file(
      interval_path, {"house_id", "timestamp", "load_kwh", "solar_kwh"});
  std::set<std::tuple<std::string, std::int64_t, int>> seen;
  for (const auto& row : intervals.rows) {
    std::string ctx = interval_path + ":" + std::to_string(row.line_number);
    const std::string& ts = row.fields[1];
    if (ts.size() != 16 || ts[10] != 'T' || ts.substr(13) != ":00")
      throw std::runtime_error(ctx + ": bad timestamp '" + ts +
                               "' (want YYYY-MM-DDTHH:00)");
    auto date = parse_date(ts.substr(0, 10));
    if (!date) throw std::runtime_error(ctx + ": bad date in timestamp '" + ts + "'");
    int hour = static_cast<int>(csv::parse_int(ts.substr(11, 2), ctx));
    IntervalRecord rec;
    try {
      rec = make_interval_record(row.fields[0], *date, hour,
                                 csv::parse_double(row.fields[2], ctx),
                                 csv::parse_double(row.fields[3], ctx));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(ctx + ": " + e.what());
    }
    if (!seen.insert({rec.house_id, to_serial_day(rec.date), rec.start_hour}).second)
      throw std::runtime_error(ctx + ": duplicate interval for house '" +
                               rec.house_id + "' at " + ts);
    if (!asset_ids.count(rec.house_id))
      throw std::runtime_error(ctx + ": house '" + rec.house_id +
                               "' has no assets row");
    data.records.push_back(std::move(rec));
  }
  detail::sort_records(data.records);
  return data;
}

/// Synthetic profile generator settings. Loads are base + evening-weighted
/// diurnal shape + noise with an annual cycle; solar follows a clear-sky bell
/// over the daylight intervals scaled by panel area, zero in [20,24) and [0,4).
struct SynthParams {
  Date start_date{2021, 1, 1};
  double floor_area_min_m2 = 80.0;
  double floor_area_max_m2 = 260.0;
  double panel_area_fraction = 0.10;  // of floor area
  double storage_min_kwh = 0.0;
  double storage_max_kwh = 8.0;
  double base_daily_load_kwh = 30.0;   // for a 150 m2 house before factors
  double load_area_exponent = 0.6;     // sub-linear in floor area
  double appliance_factor_min = 0.7;   // per-house multiplier
  double appliance_factor_max = 1.4;
  double load_season_amplitude = 0.35;   // peaks mid-summer (cooling)
  double solar_season_amplitude = 0.45;  // peaks at the solstice
  double clear_sky_yield_kwh_per_m2 = 1.05;  // daily, per m2 of panel
  double cloud_max = 0.45;                   // daily generation loss fraction
  double load_noise = 0.15;                  // per-interval multiplicative

  void validate() const {
    auto bad = [](double v) { return !std::isfinite(v) || v < 0; };
    if (bad(floor_area_min_m2) || bad(floor_area_max_m2) ||
        floor_area_min_m2 > floor_area_max_m2)
      throw std::invalid_argument("invalid floor area range");
    if (bad(storage_min_kwh) || bad(storage_max_kwh) ||
        storage_min_kwh > storage_max_kwh)
      throw std::invalid_argument("invalid storage range");
    if (bad(panel_area_fraction) || bad(base_daily_load_kwh) ||
        bad(clear_sky_yield_kwh_per_m2))
      throw std::invalid_argument("invalid generator parameter");
    if (bad(appliance_factor_min) || bad(appliance_factor_max) ||
        appliance_factor_min > appliance_factor_max)
      throw std::invalid_argument("invalid appliance factor range");
    if (cloud_max < 0 || cloud_max > 1 || load_noise < 0 || load_noise > 1)
      throw std::invalid_argument("cloud_max and load_noise must be in [0,1]");
    if (!is_valid(start_date)) throw std::invalid_argument("invalid start date");
  }
};

/// Deterministic for a fixed seed: every (house, day) draws its own substream.
inline ProfileData synthesize_profiles(int n_houses, int days, std::uint64_t seed,
                                       const SynthParams& params = {}) {
  if (n_houses < 1) throw std::invalid_argument("n_houses must be >= 1");
  if (days < 1) throw std::invalid_argument("days must be >= 1");
  params.validate();

  // Interval weights, start hours 0,4,8,12,16,20.
  static constexpr double kLoadShape[kIntervalsPerDay] = {0.8, 0.6, 0.9, 1.1, 1.5, 1.3};
  static constexpr double kSolarShape[kIntervalsPerDay] = {0.0, 0.05, 0.32, 0.40, 0.23, 0.0};
  double load_shape_sum = 0.0;
  for (double w : kLoadShape) load_shape_sum += w;

  ProfileData data;
  data.records.reserve(static_cast<std::size_t>(n_houses) * days * kIntervalsPerDay);
  constexpr double kTwoPi = 6.283185307179586;

  for (int h = 0; h < n_houses; ++h) {
    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "H%03d", h + 1);
    std::string house_id = idbuf;

    Rng house_rng = Rng::substream(seed, fnv1a64("house"), static_cast<std::uint64_t>(h));
    double floor_area =
        house_rng.uniform(params.floor_area_min_m2, params.floor_area_max_m2);
    double panel_area = floor_area * params.panel_area_fraction;
    double storage = house_rng.uniform(params.storage_min_kwh, params.storage_max_kwh);
    double appliance =
        house_rng.uniform(params.appliance_factor_min, params.appliance_factor_max);
    double load_scale =
        std::pow(floor_area / 150.0, params.load_area_exponent) * appliance;
    data.assets.push_back(make_house_assets(house_id, storage, panel_area));

    for (int d = 0; d < days; ++d) {
      Rng day_rng = Rng::substream(
          seed, fnv1a64("day"),
          static_cast<std::uint64_t>(h) * 1'000'000ULL + static_cast<std::uint64_t>(d));
      Date date = add_days(params.start_date, d);
      int doy = static_cast<int>(to_serial_day(date) -
                                 to_serial_day(Date{date.year, 1, 1}));
      double load_season =
          1.0 + params.load_season_amplitude * std::cos(kTwoPi * (doy - 200) / 365.0);
      double solar_season =
          1.0 + params.solar_season_amplitude * std::cos(kTwoPi * (doy - 172) / 365.0);
      double cloud = day_rng.uniform(0.0, params.cloud_max);
      double daily_load = params.base_daily_load_kwh * load_scale * load_season;
      double daily_solar = panel_area * params.clear_sky_yield_kwh_per_m2 *
                           solar_season * (1.0 - cloud);

      for (int k = 0; k < kIntervalsPerDay; ++k) {
        double noise = day_rng.uniform(-params.load_noise, params.load_noise);
        double load = daily_load * kLoadShape[k] / load_shape_sum * (1.0 + noise);
        double solar = daily_solar * kSolarShape[k];
        data.records.push_back(make_interval_record(
            house_id, date, k * kIntervalHours, std::max(load, 0.0), solar));
      }
    }
  }
  detail::sort_records(data.records);
  return data;
}

/// Sums each complete (house, day) into peak/off-peak aggregates. Requires all
/// six intervals of every covered day and an assets row for every house.
inline std::vector<HouseDay> aggregate_daily(const std::vector<IntervalRecord>& records,
                                             const std::vector<HouseAssets>& assets,
                                             const PeriodSpec& spec) {
  std::map<std::string, const HouseAssets*> asset_by_id;
  for (const auto& a : assets) asset_by_id[a.house_id] = &a;

  struct DayAccum {
    double load[kIntervalsPerDay];
    double solar[kIntervalsPerDay];
    int seen = 0;  // bitmask of interval indices
  };
  std::map<std::pair<std::string, std::int64_t>, DayAccum> by_day;
  for (const auto& rec : records) {
    auto it = asset_by_id.find(rec.house_id);
    if (it == asset_by_id.end())
      throw std::runtime_error("house '" + rec.house_id + "' has no assets row");
    auto& acc = by_day[{rec.house_id, to_serial_day(rec.date)}];
    int k = rec.start_hour / kIntervalHours;
    if (acc.seen & (1 << k))
      throw std::runtime_error("duplicate interval for house '" + rec.house_id +
                               "' on " + gridshare::to_string(rec.date));
    acc.seen |= 1 << k;
    acc.load[k] = rec.load_kwh;
    acc.solar[k] = rec.solar_kwh;
  }

  std::vector<HouseDay> out;
  out.reserve(by_day.size());
  for (const auto& [key, acc] : by_day) {
    if (acc.seen != (1 << kIntervalsPerDay) - 1) {
      std::ostringstream os;
      os << "house '" << key.first << "' is missing intervals on "
         << gridshare::to_string(from_serial_day(key.second));
      throw std::runtime_error(os.str());
    }
    double peak_load = 0, offpeak_load = 0, peak_solar = 0, offpeak_solar = 0;
    for (int k = 0; k < kIntervalsPerDay; ++k) {
      if (spec.is_peak(k * kIntervalHours)) {
        peak_load += acc.load[k];
        peak_solar += acc.solar[k];
      } else {
        offpeak_load += acc.load[k];
        offpeak_solar += acc.solar[k];
      }
    }
    const HouseAssets& a = *asset_by_id.at(key.first);
    out.push_back(make_house_day(key.first, from_serial_day(key.second), peak_load,
                                 offpeak_load, peak_solar, offpeak_solar,
                                 a.storage_kwh, a.panel_area_m2));
  }
  return out;  // ordered by (house_id, date) via the map
}

/// Interval CSV writer (round-trips through ingest_csv).
inline std::string to_interval_csv(const std::vector<IntervalRecord>& records) {
  std::string out = "house_id,timestamp,load_kwh,solar_kwh\n";
  for (const auto& r : records) {
    out += r.house_id + "," + detail::timestamp_string(r.date, r.start_hour) + "," +
           csv::format_fixed(r.load_kwh, 6) + "," + csv::format_fixed(r.solar_kwh, 6) +
           "\n";
  }
  return out;
}

inline std::string to_assets_csv(const std::vector<HouseAssets>& assets) {
  std::string out = "house_id,storage_kwh,panel_area_m2\n";
  for (const auto& a : assets) {
    out += a.house_id + "," + csv::format_fixed(a.storage_kwh, 6) + "," +
           csv::format_fixed(a.panel_area_m2, 6) + "\n";
  }
  return out;
}

}  // namespace gridshare::profiles

#endif  // GRIDSHARE_PROFILES_HPP
