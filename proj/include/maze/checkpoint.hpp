#pragma once

#include <cstdint>
#include <string>

#include "maze/model.hpp"

namespace maze {

// Checkpoint file layout: a text header
//
//   maze-checkpoint v1
//   dtype f64
//   seed <u64>
//   layers <n>
//   layer <i> <kind> [<in> <out>]
//   params <total doubles>
//   blob
//
// followed by the raw little-endian f64 parameter blob in declaration order
// (per layer: W,b or gamma,beta,run_mean,run_var). Round-trip is bit-exact.

void save_checkpoint(const std::string& path, const Model& model,
                     std::uint64_t seed);

struct LoadedCheckpoint {
  Model model;
  std::uint64_t seed;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace maze
