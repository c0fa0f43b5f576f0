#pragma once

#include <cstdint>
#include <string>

#include "maze/attack_config.hpp"
#include "maze/baselines.hpp"
#include "maze/bench/dataset.hpp"
#include "maze/oracle.hpp"

namespace maze {

// Everything a run needs, readable from a `key = value` text file (one pair
// per line, '#' comments) with CLI flags applied on top. Unknown keys are
// rejected by name. The same format is echoed next to run outputs.
struct RunConfig {
  std::string attack = "maze";  // maze | maze-pd | maze-wb | noise | jbda | surrogate
  AttackConfig atk;
  PdConfig pd;
  JbdaConfig jbda;
  SurrogateConfig surrogate;
  DatasetSpec data;
  TargetSpec target;
  std::uint64_t target_seed = 42;
  int n_seeds = 100;            // seed-set size for pd/jbda
  std::string seeds_file;       // optional explicit seed file (csv or tensor)
  std::string surrogate_kind = "blobs";  // dataset kind for run_surrogate
  double surrogate_shift = 0.1;
  long surrogate_n = 4000;
  std::string out_dir;

  static RunConfig from_file(const std::string& path);
  /// Applies one key=value pair; throws naming the key when unknown or
  /// malformed.
  void apply(const std::string& key, const std::string& value);
  /// Canonical text form (sorted keys); re-parsing it reproduces the config.
  std::string echo() const;
  void write_echo(const std::string& path) const;
  std::uint64_t hash() const;  // FNV-1a over echo()
};

std::uint64_t fnv1a(const std::string& s);

}  // namespace maze
