#pragma once

#include <string>
#include <vector>

#include "maze/bench/run_config.hpp"
#include "maze/maze_pd.hpp"

namespace maze {

struct SweepSpec {
  std::string axis = "Q";  // Q | m | replay | attack
  std::vector<std::string> values;
  int repeats = 5;
  RunConfig base;
  std::string out_dir;  // optional; per-run logs land here when set
};

struct ReportRow {
  std::string attack;
  std::string axis;
  std::string value;
  std::string config_hash;
  std::uint64_t seed = 0;
  long final_q = 0;
  double clone_acc = 0;
  double norm_acc = 0;
  double wall_s = 0;
  std::string status = "ok";  // ok | failed
};

struct Report {
  std::vector<ReportRow> rows;
  double target_accuracy = 0;
  static const char* csv_header();
  void write_csv(const std::string& path) const;
  /// Median normalized accuracy per axis value, in the sweep's value order.
  std::vector<std::pair<std::string, double>> median_by_value() const;
  std::string summary_table() const;
};

/// Executes each (value, repeat) run in isolation against one shared target
/// and aggregates the results. Individual run failures are recorded as
/// failure rows; the sweep continues.
Report run_sweep(const SweepSpec& spec);

/// Shared run dispatcher used by the sweep and the CLI: trains/loads nothing,
/// just runs `cfg.attack` against the oracle.
AttackResult dispatch_attack(const RunConfig& cfg, Oracle& oracle,
                             const Model& target, const Dataset& data,
                             const EvalContext& eval);

double median(std::vector<double> v);

}  // namespace maze
