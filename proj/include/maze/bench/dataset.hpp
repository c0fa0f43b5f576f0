#pragma once

#include <string>

#include "maze/data.hpp"

namespace maze {

enum class DataKind { Blobs, Rings, Grid };

const char* data_kind_name(DataKind k);
DataKind data_kind_from_name(const std::string& name);

struct DatasetSpec {
  DataKind kind = DataKind::Blobs;
  int n_train = 4000;
  int n_test = 1000;
  int d = 32;
  int classes = 4;
  std::uint64_t seed = 1;
  double noise = 0.2;   // per-coordinate sigma
  double sep = 1.3;     // min center distance, in units of noise * sqrt(d)
  double shift = 0.0;   // constant offset, for surrogate variants
  int modes_per_class = 1;  // blobs: gaussian modes mixed into each class
  double center_box = 0.35; // blobs: centers drawn uniform in [-box, box]^d
};

/// Deterministic synthetic dataset, features normalized to [-1,1],
/// class-balanced within one sample, train/test disjoint. Rejects specs whose
/// class count the kind cannot represent.
Dataset make_dataset(const DatasetSpec& spec);

std::string dataset_id(const DatasetSpec& spec);

}  // namespace maze
