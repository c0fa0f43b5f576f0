#pragma once

#include <string>

#include "maze/attack.hpp"

namespace maze {

/// Wasserstein critic loss with gradient penalty:
/// mean D(x_fake) - mean D(x_real) + gp_weight * mean((||grad_xhat D||_2 - 1)^2)
/// with x_hat a per-sample random convex interpolate of real and fake rows.
/// Rejects empty or mismatched batches. When `grads` is non-null the critic
/// parameter gradients of the full loss (penalty included) are written there.
double critic_loss_backward(Model& critic, const Mat& x_real, const Mat& x_fake,
                            double gp_weight, Rng& alpha_rng, GradMap* grads);

inline double critic_loss(Model& critic, const Mat& x_real, const Mat& x_fake,
                          double gp_weight, Rng& alpha_rng) {
  return critic_loss_backward(critic, x_real, x_fake, gp_weight, alpha_rng,
                              nullptr);
}

/// gp_weight * mean((||grad_x D(x)||_2 - 1)^2) evaluated at the given points.
double gradient_penalty(Model& critic, const Mat& x_hat, double gp_weight);

/// Per-sample gradient of the critic output w.r.t. its input, as values
/// (no parameter gradients involved).
Mat critic_input_gradient(Model& critic, const Mat& x);

/// Combined partial-data generator loss, per sample:
/// -KL(y_t || y_c) - lambda * D(x). `y_t` rows come from the oracle; the
/// critic evaluation is query-free.
Vec generator_loss_pd(const Mat& y_t, const Mat& y_c, Model& critic,
                      const Mat& x, double lambda);

// Seed-set files: either CSV (one row of d comma-separated values per line)
// or the binary tensor layout "maze-seeds v1 <n> <d>\n" + row-major
// little-endian f64 blob.
SeedSet load_seeds_csv(const std::string& path);
SeedSet load_seeds_tensor(const std::string& path);
void save_seeds_tensor(const std::string& path, const SeedSet& seeds);

/// Partial-data attack: the data-free loop plus a critic phase, generator
/// steered by the combined loss. Query accounting is identical to run_maze.
AttackResult run_maze_pd(Oracle& oracle, const SeedSet& seeds,
                         const AttackConfig& cfg, const PdConfig& pd,
                         const EvalContext& eval);

}  // namespace maze
