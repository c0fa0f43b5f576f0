#include "maze/zo.hpp"

#include <cmath>
#include <stdexcept>

namespace maze {

DirectionSet sample_sphere(int d, int m, Rng& rng) {
  if (d < 1 || m < 1)
    throw std::invalid_argument("sample_sphere: d and m must be >= 1");
  DirectionSet set;
  set.m = m;
  set.dirs = Mat(m, d);
  for (int i = 0; i < m; ++i) {
    double norm2 = 0.0;
    do {
      Mat g = randn(rng, 1, d);
      norm2 = g.row(0).squaredNorm();
      set.dirs.row(i) = g.row(0);
    } while (norm2 == 0.0);  // astronomically unlikely; keeps rows unit
    set.dirs.row(i) /= std::sqrt(norm2);
  }
  return set;
}

Vec fd_single(const ScalarLoss& loss_at, const Vec& x, const Vec& u,
              double epsilon, std::optional<double> cached) {
  if (epsilon <= 0.0) throw std::invalid_argument("fd_single: epsilon must be > 0");
  if (x.size() != u.size())
    throw std::invalid_argument("fd_single: direction dimension mismatch");
  double d = static_cast<double>(x.size());
  double base = cached ? *cached : loss_at(x);
  if (!std::isfinite(base))
    throw std::domain_error("fd_single: non-finite loss at base point");
  double shifted = loss_at(x + epsilon * u);
  if (!std::isfinite(shifted))
    throw std::domain_error("fd_single: non-finite loss at perturbed point");
  return d * (shifted - base) / epsilon * u;
}

GradientEstimate estimate_grad(const BatchLoss& loss_at, const Mat& x,
                               const ZoConfig& cfg, Rng& rng) {
  if (cfg.epsilon <= 0.0 || cfg.m < 1)
    throw std::invalid_argument("estimate_grad: invalid ZoConfig");
  const long B = x.rows();
  const double d = static_cast<double>(x.cols());

  Vec base = loss_at(x);  // one batched call: B queries
  if (base.size() != B)
    throw std::invalid_argument("estimate_grad: loss must return one value per row");
  if (!base.allFinite())
    throw std::domain_error("estimate_grad: non-finite loss at base point");

  Mat ghat = Mat::Zero(B, x.cols());
  for (int i = 0; i < cfg.m; ++i) {
    // One fresh direction per sample; the perturbation is evaluated for the
    // whole batch in a single call.
    DirectionSet dirs = sample_sphere(static_cast<int>(x.cols()),
                                      static_cast<int>(B), rng);
    Mat perturbed = x + cfg.epsilon * dirs.dirs;
    Vec shifted = loss_at(perturbed);
    if (!shifted.allFinite())
      throw std::domain_error("estimate_grad: non-finite loss at perturbation " +
                              std::to_string(i));
    Vec coeff = d * (shifted - base) / cfg.epsilon;
    ghat += coeff.asDiagonal() * dirs.dirs;
  }
  ghat /= static_cast<double>(cfg.m);
  return {std::move(ghat), B * (cfg.m + 1)};
}

GradMap inject_and_backprop(GraphForward& gf, const Mat& seed_grad) {
  if (gf.activations.empty() || gf.activations.back()->op != std::string("tanh"))
    throw std::invalid_argument("inject_and_backprop: model must end in a tanh head");
  NodePtr xp = gf.pre_head();
  if (seed_grad.rows() != xp->value.rows() ||
      seed_grad.cols() != xp->value.cols())
    throw std::invalid_argument("inject_and_backprop: gradient shape does not match pre-tanh activation");
  backward_from(xp, seed_grad);
  return collect_grads(gf);
}

GradMap inject_and_backprop(Model& generator, const Mat& z,
                            const Mat& seed_grad) {
  auto gf = forward_graph(generator, z);
  return inject_and_backprop(gf, seed_grad);
}

}  // namespace maze
