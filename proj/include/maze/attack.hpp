#pragma once

#include <optional>

#include "maze/attack_config.hpp"
#include "maze/optim.hpp"
#include "maze/oracle.hpp"
#include "maze/zo.hpp"

namespace maze {

struct AttackResult {
  Model clone;
  AttackLog log;
};

// The attack outer loop: generator phase (disagreement objective trained
// through zeroth-order estimates), clone phase (KL distillation on fresh
// queries), experience replay, and optionally a Wasserstein critic phase in
// the partial-data variant. Phases are public so tests can drive them
// individually.
class MazeAttack {
 public:
  MazeAttack(Oracle& oracle, const AttackConfig& cfg, const EvalContext* eval);

  /// Replace ZO estimation with exact backprop through this target model in
  /// the generator phase. Query charges stay identical for budget parity.
  void enable_whitebox(const Model& target);
  /// Switch the generator loss to the partial-data objective and add the
  /// critic phase. Rejects an empty seed set.
  void enable_pd(const SeedSet& seeds, const PdConfig& pd);

  void generator_phase();
  void clone_phase();
  void replay_phase();
  void critic_phase();

  /// Full budget-bounded loop; budget exhaustion terminates cleanly.
  AttackResult run();

  Model& generator() { return gen_; }
  Model& clone_model() { return clone_; }
  Model* critic() { return critic_ ? &*critic_ : nullptr; }
  ReplayBuffer& buffer() { return buffer_; }
  long planned_iterations() const { return planned_; }
  long iteration() const { return iter_; }
  double eta_g_now() const;
  double eta_c_now() const;

 private:
  void log_row();

  Oracle& oracle_;
  AttackConfig cfg_;
  const EvalContext* eval_;

  Model gen_, clone_;
  std::optional<Model> critic_;
  std::optional<Model> whitebox_target_;
  std::optional<PdConfig> pd_;
  Mat pd_seeds_;

  SgdOptimizer opt_g_, opt_c_;
  std::optional<AdamOptimizer> opt_d_;
  ReplayBuffer buffer_;
  CosineSchedule sched_g_, sched_c_;

  Rng rng_latent_, rng_dirs_, rng_replay_, rng_evict_;
  Rng rng_pd_latent_, rng_pd_real_, rng_pd_alpha_;

  long cost_iter_ = 0;
  long planned_ = 0;
  long iter_ = 0;
  AttackLog log_;
  double sum_loss_g_ = 0, sum_loss_c_ = 0;
  long n_loss_g_ = 0, n_loss_c_ = 0;
};

/// Algorithm entry point: data-free extraction against a query-only oracle.
AttackResult run_maze(Oracle& oracle, const AttackConfig& cfg,
                      const EvalContext& eval);

/// Perfect-gradient ablation: same loop, generator gradients backpropagated
/// through the target exactly. Constructs its own internal oracle around a
/// copy of the target so the ledger accounting matches run_maze.
AttackResult run_maze_whitebox(const Model& target, const AttackConfig& cfg,
                               const EvalContext& eval);

}  // namespace maze
