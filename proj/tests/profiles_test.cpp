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

#include "gridshare/profiles.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "gtest/gtest.h"

using namespace gridshare;
using namespace gridshare::profiles;

namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("gridshare_test_" + std::to_string(::testing::UnitTest::GetInstance()
                                                    ->random_seed()) +
             "_" + std::to_string(counter()++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path file(const std::string& name, const std::string& content) const {
    fs::path p = path_ / name;
    std::ofstream(p) << content;
    return p;
  }
  const fs::path& path() const { return path_; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  fs::path path_;
};

const char* kAssetsCsv =
    "house_id,storage_kwh,panel_area_m2\n"
    "A,4.0,12.5\n"
    "B,0.0,8.0\n";

std::string two_house_day(const std::string& date) {
  std::string out;
  for (const char* id : {"A", "B"}) {
    for (int h = 0; h < 24; h += 4) {
      char line[96];
      std::snprintf(line, sizeof(line), "%s,%sT%02d:00,1.5,0.25\n", id, date.c_str(), h);
      out += line;
    }
  }
  return out;
}

TEST(IngestCsv, ParsesWellFormedInput) {
  TempDir dir;
  std::string intervals = "house_id,timestamp,load_kwh,solar_kwh\n" +
                          two_house_day("2021-03-01");
  auto data = ingest_csv(dir.file("intervals.csv", intervals).string(),
                         dir.file("assets.csv", kAssetsCsv).string());
  ASSERT_EQ(data.records.size(), 12u);
  ASSERT_EQ(data.assets.size(), 2u);
  // sorted by (house, timestamp)
  EXPECT_EQ(data.records.front().house_id, "A");
  EXPECT_EQ(data.records.back().house_id, "B");
  EXPECT_TRUE(std::is_sorted(data.records.begin(), data.records.end(),
                             [](const IntervalRecord& a, const IntervalRecord& b) {
                               return std::tuple(a.house_id, to_serial_day(a.date),
                                                 a.start_hour) <
                                      std::tuple(b.house_id, to_serial_day(b.date),
                                                 b.start_hour);
                             }));
}

TEST(IngestCsv, HeaderOnlyFilesMakeEmptyLists) {
  TempDir dir;
  auto data =
      ingest_csv(dir.file("i.csv", "house_id,timestamp,load_kwh,solar_kwh\n").string(),
                 dir.file("a.csv", "house_id,storage_kwh,panel_area_m2\n").string());
  EXPECT_TRUE(data.records.empty());
  EXPECT_TRUE(data.assets.empty());
}

TEST(IngestCsv, NegativeEnergyNamesTheLine) {
  TempDir dir;
  std::string intervals =
      "house_id,timestamp,load_kwh,solar_kwh\n"
      "A,2021-03-01T00:00,1.0,0.0\n"
      "A,2021-03-01T04:00,-1.0,0.0\n";
  try {
    ingest_csv(dir.file("i.csv", intervals).string(),
               dir.file("a.csv", kAssetsCsv).string());
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
}

TEST(IngestCsv, RejectsDuplicateTimestamp) {
  TempDir dir;
  std::string intervals =
      "house_id,timestamp,load_kwh,solar_kwh\n"
      "A,2021-03-01T08:00,1.0,0.0\n"
      "A,2021-03-01T08:00,2.0,0.0\n";
  EXPECT_THROW(ingest_csv(dir.file("i.csv", intervals).string(),
                          dir.file("a.csv", kAssetsCsv).string()),
               std::runtime_error);
}

TEST(IngestCsv, RejectsHouseWithoutAssets) {
  TempDir dir;
  std::string intervals =
      "house_id,timestamp,load_kwh,solar_kwh\n"
      "Z,2021-03-01T08:00,1.0,0.0\n";
  EXPECT_THROW(ingest_csv(dir.file("i.csv", intervals).string(),
                          dir.file("a.csv", kAssetsCsv).string()),
               std::runtime_error);
}

TEST(IngestCsv, RejectsOffGridHour) {
  TempDir dir;
  std::string intervals =
      "house_id,timestamp,load_kwh,solar_kwh\n"
      "A,2021-03-01T03:00,1.0,0.0\n";
  EXPECT_THROW(ingest_csv(dir.file("i.csv", intervals).string(),
                          dir.file("a.csv", kAssetsCsv).string()),
               std::runtime_error);
}

TEST(Synthesize, CardinalityMatches) {
  auto data = synthesize_profiles(48, 365, 7);
  EXPECT_EQ(data.records.size(), 48u * 365u * 6u);
  EXPECT_EQ(data.assets.size(), 48u);
}

TEST(Synthesize, DeterministicForFixedSeed) {
  auto a = synthesize_profiles(5, 20, 42);
  auto b = synthesize_profiles(5, 20, 42);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].load_kwh, b.records[i].load_kwh);
    EXPECT_EQ(a.records[i].solar_kwh, b.records[i].solar_kwh);
  }
  for (std::size_t i = 0; i < a.assets.size(); ++i) {
    EXPECT_EQ(a.assets[i].storage_kwh, b.assets[i].storage_kwh);
    EXPECT_EQ(a.assets[i].panel_area_m2, b.assets[i].panel_area_m2);
  }
}

TEST(Synthesize, DifferentSeedsDiffer) {
  auto a = synthesize_profiles(3, 5, 1);
  auto b = synthesize_profiles(3, 5, 2);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.records.size(); ++i)
    if (a.records[i].load_kwh != b.records[i].load_kwh) any_diff = true;
  EXPECT_TRUE(any_diff);
}

TEST(Synthesize, NoSolarAtNight) {
  auto data = synthesize_profiles(1, 1, 1);
  for (const auto& rec : data.records) {
    if (rec.start_hour >= 20 || rec.start_hour < 4)
      EXPECT_EQ(rec.solar_kwh, 0.0) << "hour " << rec.start_hour;
  }
}

TEST(Synthesize, RejectsBadParams) {
  SynthParams params;
  params.storage_min_kwh = 5;
  params.storage_max_kwh = 1;
  EXPECT_THROW(synthesize_profiles(1, 1, 0, params), std::invalid_argument);
  EXPECT_THROW(synthesize_profiles(0, 1, 0), std::invalid_argument);
  EXPECT_THROW(synthesize_profiles(1, 0, 0), std::invalid_argument);
}

TEST(PeriodSpecTest, ValidatesWindow) {
  EXPECT_NO_THROW(PeriodSpec(8, 20));
  EXPECT_THROW(PeriodSpec(8, 8), std::invalid_argument);   // empty
  EXPECT_THROW(PeriodSpec(0, 24), std::invalid_argument);  // no off-peak left
  EXPECT_THROW(PeriodSpec(7, 20), std::invalid_argument);  // unaligned
  EXPECT_THROW(PeriodSpec(20, 8), std::invalid_argument);  // inverted
  PeriodSpec spec(8, 20);
  EXPECT_TRUE(spec.is_peak(8));
  EXPECT_TRUE(spec.is_peak(16));
  EXPECT_FALSE(spec.is_peak(20));
  EXPECT_FALSE(spec.is_peak(4));
  EXPECT_EQ(spec.peak_interval_count(), 3);
  EXPECT_EQ(spec.offpeak_interval_count(), 3);
}

std::vector<IntervalRecord> one_day_records(const std::vector<double>& load,
                                            const std::vector<double>& solar) {
  std::vector<IntervalRecord> recs;
  for (int k = 0; k < 6; ++k)
    recs.push_back(
        make_interval_record("A", Date{2021, 3, 1}, k * 4, load[k], solar[k]));
  return recs;
}

TEST(AggregateDaily, UniformLoadSplitsEvenly) {
  auto recs = one_day_records({1, 1, 1, 1, 1, 1}, {0, 0, 0, 0, 0, 0});
  auto days = aggregate_daily(recs, {make_house_assets("A", 2, 10)}, PeriodSpec(8, 20));
  ASSERT_EQ(days.size(), 1u);
  EXPECT_DOUBLE_EQ(days[0].peak_load_kwh, 3.0);
  EXPECT_DOUBLE_EQ(days[0].offpeak_load_kwh, 3.0);
  EXPECT_DOUBLE_EQ(days[0].storage_kwh, 2.0);
  EXPECT_DOUBLE_EQ(days[0].panel_area_m2, 10.0);
}

TEST(AggregateDaily, SolarSplitMatchesDirectSummation) {
  // independent oracle: sum the interval values directly
  std::vector<double> solar{0, 0, 2, 3, 1, 0};
  PeriodSpec spec(8, 20);
  double want_peak = 0, want_off = 0;
  for (int k = 0; k < 6; ++k)
    (spec.is_peak(k * 4) ? want_peak : want_off) += solar[k];
  EXPECT_DOUBLE_EQ(want_peak, 6.0);
  EXPECT_DOUBLE_EQ(want_off, 0.0);

  auto recs = one_day_records({1, 1, 1, 1, 1, 1}, solar);
  auto days = aggregate_daily(recs, {make_house_assets("A", 0, 0)}, spec);
  ASSERT_EQ(days.size(), 1u);
  EXPECT_DOUBLE_EQ(days[0].peak_solar_kwh, want_peak);
  EXPECT_DOUBLE_EQ(days[0].offpeak_solar_kwh, want_off);
}

TEST(AggregateDaily, TwoHousesTwoDaysGiveFourRows) {
  auto data = synthesize_profiles(2, 2, 3);
  auto days = aggregate_daily(data.records, data.assets, PeriodSpec(8, 20));
  EXPECT_EQ(days.size(), 4u);
}

TEST(AggregateDaily, PermutationInvariant) {
  auto data = synthesize_profiles(3, 4, 9);
  auto days = aggregate_daily(data.records, data.assets, PeriodSpec(8, 20));
  auto shuffled = data.records;
  std::mt19937 rng(123);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  auto days2 = aggregate_daily(shuffled, data.assets, PeriodSpec(8, 20));
  ASSERT_EQ(days.size(), days2.size());
  for (std::size_t i = 0; i < days.size(); ++i) {
    EXPECT_EQ(days[i].house_id, days2[i].house_id);
    EXPECT_EQ(days[i].peak_load_kwh, days2[i].peak_load_kwh);
    EXPECT_EQ(days[i].offpeak_solar_kwh, days2[i].offpeak_solar_kwh);
  }
}

TEST(AggregateDaily, DailyTotalsAreExact) {
  auto data = synthesize_profiles(4, 30, 11);
  auto days = aggregate_daily(data.records, data.assets, PeriodSpec(8, 20));
  std::map<std::pair<std::string, std::int64_t>, std::pair<double, double>> sums;
  for (const auto& r : data.records) {
    auto& s = sums[{r.house_id, to_serial_day(r.date)}];
    s.first += r.load_kwh;
    s.second += r.solar_kwh;
  }
  for (const auto& d : days) {
    auto s = sums.at({d.house_id, to_serial_day(d.date)});
    EXPECT_NEAR(d.peak_load_kwh + d.offpeak_load_kwh, s.first, 1e-9);
    EXPECT_NEAR(d.peak_solar_kwh + d.offpeak_solar_kwh, s.second, 1e-9);
  }
}

TEST(AggregateDaily, MissingIntervalIsAnError) {
  auto recs = one_day_records({1, 1, 1, 1, 1, 1}, {0, 0, 0, 0, 0, 0});
  recs.pop_back();
  EXPECT_THROW(
      aggregate_daily(recs, {make_house_assets("A", 0, 0)}, PeriodSpec(8, 20)),
      std::runtime_error);
}

TEST(AggregateDaily, UnknownHouseIsAnError) {
  auto recs = one_day_records({1, 1, 1, 1, 1, 1}, {0, 0, 0, 0, 0, 0});
  EXPECT_THROW(
      aggregate_daily(recs, {make_house_assets("B", 0, 0)}, PeriodSpec(8, 20)),
      std::runtime_error);
}

TEST(CsvRoundTrip, IngestReadsWhatWritersWrite) {
  auto data = synthesize_profiles(2, 3, 5);
  TempDir dir;
  auto loaded = ingest_csv(
      dir.file("i.csv", to_interval_csv(data.records)).string(),
      dir.file("a.csv", to_assets_csv(data.assets)).string());
  ASSERT_EQ(loaded.records.size(), data.records.size());
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    EXPECT_EQ(loaded.records[i].house_id, data.records[i].house_id);
    EXPECT_EQ(loaded.records[i].start_hour, data.records[i].start_hour);
    EXPECT_EQ(loaded.records[i].load_kwh, data.records[i].load_kwh);
  }
}

}  // namespace
