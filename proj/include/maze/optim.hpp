#pragma once

#include <map>
#include <string>

#include "maze/model.hpp"

namespace maze {

/// lr(t) = 0.5 * lr0 * (1 + cos(pi * t / total)). Rejects t outside
/// [0, total].
struct CosineSchedule {
  double lr0 = 0.0;
  long total = 1;
  double at(long t) const;
};

class SgdOptimizer {
 public:
  explicit SgdOptimizer(double momentum = 0.0) : momentum_(momentum) {}
  /// In-place parameter update; every parameter must have a gradient entry.
  void step(Model& model, const GradMap& grads, double lr);
  long steps() const { return steps_; }

 private:
  double momentum_;
  std::map<std::string, Mat> velocity_;
  long steps_ = 0;
};

class AdamOptimizer {
 public:
  AdamOptimizer(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(Model& model, const GradMap& grads, double lr);
  long steps() const { return steps_; }

 private:
  double beta1_, beta2_, eps_;
  std::map<std::string, Mat> m_, v_;
  long steps_ = 0;
};

}  // namespace maze
