#pragma once

#include "maze/losses.hpp"
#include "maze/model.hpp"

namespace maze {

/// clone accuracy / target accuracy. Rejects a non-positive denominator.
double normalized_accuracy(double clone_acc, double target_acc);

/// Fraction of eval inputs where the two models agree on the argmax class.
/// Evaluation-only path: never touches a query ledger.
double agreement_rate(const Model& clone, const Model& target,
                      const Mat& x_eval);

double model_accuracy(const Model& model, const Mat& x,
                      const std::vector<int>& y);

}  // namespace maze
