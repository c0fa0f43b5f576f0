#include "maze/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace maze {

double CosineSchedule::at(long t) const {
  if (t < 0 || t > total)
    throw std::out_of_range("CosineSchedule: step " + std::to_string(t) +
                            " outside [0, " + std::to_string(total) + "]");
  return 0.5 * lr0 *
         (1.0 + std::cos(M_PI * static_cast<double>(t) /
                         static_cast<double>(total)));
}

namespace {
const Mat& grad_for(const GradMap& grads, const std::string& name) {
  auto it = grads.find(name);
  if (it == grads.end())
    throw std::invalid_argument("optimizer: missing gradient for parameter " +
                                name);
  return it->second;
}
}  // namespace

void SgdOptimizer::step(Model& model, const GradMap& grads, double lr) {
  model.for_each_param([&](const std::string& name, Mat& p) {
    const Mat& g = grad_for(grads, name);
    if (g.rows() != p.rows() || g.cols() != p.cols())
      throw std::invalid_argument("sgd: gradient shape mismatch for " + name);
    if (momentum_ != 0.0) {
      auto [it, inserted] = velocity_.try_emplace(name, Mat::Zero(p.rows(), p.cols()));
      Mat& v = it->second;
      v = momentum_ * v + g;
      p -= lr * v;
    } else {
      p -= lr * g;
    }
    require_finite(p, name.c_str());
  });
  ++steps_;
}

void AdamOptimizer::step(Model& model, const GradMap& grads, double lr) {
  long t = steps_ + 1;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t));
  model.for_each_param([&](const std::string& name, Mat& p) {
    const Mat& g = grad_for(grads, name);
    if (g.rows() != p.rows() || g.cols() != p.cols())
      throw std::invalid_argument("adam: gradient shape mismatch for " + name);
    auto [mit, mi] = m_.try_emplace(name, Mat::Zero(p.rows(), p.cols()));
    auto [vit, vi] = v_.try_emplace(name, Mat::Zero(p.rows(), p.cols()));
    Mat& m = mit->second;
    Mat& v = vit->second;
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v.array() + (1.0 - beta2_) * g.array().square();
    Mat mhat = m / bc1;
    Mat vhat = v / bc2;
    p.array() -= lr * mhat.array() / (vhat.array().sqrt() + eps_);
    require_finite(p, name.c_str());
  });
  ++steps_;
}

}  // namespace maze
