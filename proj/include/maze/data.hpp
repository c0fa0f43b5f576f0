#pragma once

#include <vector>

#include "maze/common.hpp"

namespace maze {

struct Dataset {
  Mat x_train;
  std::vector<int> y_train;
  Mat x_test;
  std::vector<int> y_test;
  int classes = 0;
  int dim() const { return static_cast<int>(x_train.cols()); }
};

}  // namespace maze
