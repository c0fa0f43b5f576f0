#pragma once

#include <functional>
#include <optional>

#include "maze/model.hpp"

namespace maze {

struct DirectionSet {
  int m = 0;
  Mat dirs;  // m x d, unit rows
};

/// m i.i.d. directions uniform on the unit sphere in R^d (normalized
/// standard-normal draws).
DirectionSet sample_sphere(int d, int m, Rng& rng);

struct ZoConfig {
  double epsilon = 1e-3;  // forward-difference smoothing factor
  int m = 10;             // directions averaged per estimate
};

struct GradientEstimate {
  Mat ghat;            // per-sample gradient estimate, shape of x
  long queries_spent;  // B * (m + 1) for the uncached form
};

using ScalarLoss = std::function<double(const Vec&)>;
/// Per-sample losses for a whole batch; one call per perturbation.
using BatchLoss = std::function<Vec(const Mat&)>;

/// Single-direction forward difference: d * (L(x + eps*u) - L(x)) / eps * u.
/// Pass `cached` to skip the base evaluation.
Vec fd_single(const ScalarLoss& loss_at, const Vec& x, const Vec& u,
              double epsilon, std::optional<double> cached = std::nullopt);

/// Averaged forward-difference estimate over cfg.m directions per sample.
/// Every perturbation index is evaluated with one batched loss call, so a
/// batch of B rows consumes exactly B*(m+1) target queries.
GradientEstimate estimate_grad(const BatchLoss& loss_at, const Mat& x,
                               const ZoConfig& cfg, Rng& rng);

/// Seeds the generator's pre-tanh activation with `seed_grad` and
/// backpropagates to the parameter leaves. The forward must have been built
/// with tracked parameters and the model must end in a tanh head.
GradMap inject_and_backprop(GraphForward& gf, const Mat& seed_grad);

/// Convenience overload that runs the generator forward itself.
GradMap inject_and_backprop(Model& generator, const Mat& z,
                            const Mat& seed_grad);

}  // namespace maze
