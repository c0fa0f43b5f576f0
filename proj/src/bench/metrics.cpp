#include "maze/bench/metrics.hpp"

#include <stdexcept>

namespace maze {

double normalized_accuracy(double clone_acc, double target_acc) {
  if (target_acc <= 0.0)
    throw std::invalid_argument("normalized_accuracy: target accuracy must be > 0");
  return clone_acc / target_acc;
}

double agreement_rate(const Model& clone, const Model& target,
                      const Mat& x_eval) {
  if (x_eval.rows() == 0)
    throw std::invalid_argument("agreement_rate: empty evaluation set");
  auto c = argmax_rows(clone.forward_eval(x_eval));
  auto t = argmax_rows(target.forward_eval(x_eval));
  long hits = 0;
  for (size_t i = 0; i < c.size(); ++i)
    if (c[i] == t[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(c.size());
}

double model_accuracy(const Model& model, const Mat& x,
                      const std::vector<int>& y) {
  return accuracy_of(model.forward_eval(x), y);
}

}  // namespace maze
