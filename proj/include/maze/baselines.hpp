#pragma once

#include "maze/attack.hpp"

namespace maze {

struct JbdaConfig {
  int n_seeds = 100;
  int rounds = 6;
  int epochs_per_round = 10;
  double lambda = 0.1;  // perturbation magnitude
  double lr = 1e-3;     // Adam
};

struct SurrogateConfig {
  int epochs = 100;
  double lr = 0.1;  // SGD, cosine-annealed
};

/// x' = clip(x + lambda * sign(grad_x CE(C(x), y)), -1, 1) with sign(0) = 0.
/// One hard label per row.
Mat jbda_augment(Model& clone, const Mat& x, const std::vector<int>& labels,
                 double lambda);

/// Jacobian-based dataset augmentation attack. Labels the seed pool through
/// the oracle (hard labels), then alternates augmentation rounds that double
/// the pool with retraining. Stops cleanly on budget exhaustion.
AttackResult run_jbda(Oracle& oracle, const SeedSet& seeds,
                      const JbdaConfig& jbda, const AttackConfig& base,
                      const EvalContext& eval);

/// Uniform-noise attack: queries x ~ U[-1,1]^d in batches of base.batch
/// until the budget is spent, training the clone on the soft labels with
/// fresh-batch steps plus replay at the same replay-to-fresh ratio as the
/// main attack loop.
AttackResult run_noise(Oracle& oracle, const AttackConfig& base,
                       const EvalContext& eval);

/// Surrogate-data attack: one counted labeling pass over the surrogate
/// inputs, then offline distillation on the collected pairs.
AttackResult run_surrogate(Oracle& oracle, const Mat& surrogate_inputs,
                           const SurrogateConfig& cfg, const AttackConfig& base,
                           const EvalContext& eval);

}  // namespace maze
