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

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gridshare/pipeline.hpp"

namespace {

using gridshare::pipeline::RunConfig;

RunConfig load_config(const std::string& config_path, const std::string& out_override,
                      bool seed_given, std::uint64_t seed_override) {
  RunConfig cfg = RunConfig::from_json_file(config_path);
  if (!out_override.empty()) cfg.output_dir = out_override;
  if (seed_given) cfg.seed = seed_override;
  return cfg;
}

void print_resilience(const std::vector<gridshare::pipeline::ResilienceEntry>& rows) {
  for (const auto& r : rows) {
    std::cout << r.block << " [" << r.variant << "] houses=" << r.house_count << " ";
    if (r.status == "ok") {
      std::cout << "rho_c=" << r.threshold << (r.most_resilient ? "  <- most resilient" : "");
    } else {
      std::cout << r.status;
    }
    std::cout << "\n";
  }
}

void print_compare(const gridshare::pipeline::CompareResult& result) {
  for (const auto& row : result.rows) {
    std::cout << row.label << ": grid energy " << row.total_kwh << " kWh, ";
    if (row.status == "ok") {
      std::cout << "rho_c=" << row.threshold;
    } else {
      std::cout << row.status;
    }
    std::cout << "\n";
  }
  if (result.rows.size() == 2 && result.rows[0].status == "ok" &&
      result.rows[1].status == "ok") {
    std::cout << "delta=" << result.delta
              << " improvement=" << result.pct_improvement << "%\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridshare: microgrid resilience and peer-to-peer trading toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool seed_given = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run configuration (JSON)")->required();
    cmd->add_option("--out", out_override, "override the configured output directory");
    cmd->add_option("--seed", seed_override, "override the configured global seed")
        ->each([&](const std::string&) { seed_given = true; });
  };

  CLI::App* partition = app.add_subcommand("partition", "partition the feeder by switch states");
  CLI::App* resilience =
      app.add_subcommand("resilience", "rank microgrids by percolation threshold");
  CLI::App* trade = app.add_subcommand("trade", "run the P2P trading year and savings reports");
  CLI::App* compare =
      app.add_subcommand("compare", "compare grid-import resilience with and without sharing");
  CLI::App* all = app.add_subcommand("all", "run the whole pipeline");
  for (CLI::App* cmd : {partition, resilience, trade, compare, all}) add_common(cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = load_config(config_path, out_override, seed_given, seed_override);
    if (partition->parsed()) {
      auto result = gridshare::pipeline::cmd_partition(cfg);
      std::cout << result.partition.blocks.size() << " blocks\n";
      for (std::size_t i = 0; i < result.partition.blocks.size(); ++i)
        std::cout << result.labels[i] << ": " << result.partition.blocks[i].size()
                  << " nodes\n";
    } else if (resilience->parsed()) {
      print_resilience(gridshare::pipeline::cmd_resilience(cfg));
    } else if (trade->parsed()) {
      auto result = gridshare::pipeline::cmd_trade(cfg);
      std::cout << "microgrid " << result.microgrid << ": total savings "
                << result.report.total_savings().dollars_string() << " USD ("
                << gridshare::pipeline::percent(result.report.total_savings(),
                                                result.report.total_without_sharing)
                << "% of the without-sharing cost)\n";
    } else if (compare->parsed()) {
      print_compare(gridshare::pipeline::cmd_compare(cfg));
    } else if (all->parsed()) {
      auto result = gridshare::pipeline::cmd_all(cfg);
      std::cout << result.partition.partition.blocks.size() << " blocks\n";
      print_resilience(result.resilience);
      std::cout << "microgrid " << result.trade.microgrid << ": total savings "
                << result.trade.report.total_savings().dollars_string() << " USD\n";
      print_compare(result.compare);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
