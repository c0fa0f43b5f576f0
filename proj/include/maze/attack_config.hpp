#pragma once

#include <string>
#include <vector>

#include "maze/common.hpp"

namespace maze {

struct AttackConfig {
  long budget = 200000;  // Q
  double epsilon = 1e-3;
  int m = 10;
  int batch = 128;       // B
  int n_g = 1;
  int n_c = 5;
  int n_r = 10;
  double eta_g = 1e-4;   // generator SGD, cosine-annealed per outer iteration
  double eta_c = 0.1;    // clone SGD(0.9), cosine-annealed per outer iteration
  double clone_momentum = 0.9;
  int latent_dim = 32;
  std::uint64_t seed = 0;
  int checkpoint_every = 50;  // outer iterations between log rows
  long replay_cap = 0;        // 0 = unbounded buffer

  std::vector<int> gen_hidden{128, 128};
  bool gen_batchnorm = true;
  std::vector<int> clone_hidden{128, 128};
  // Hidden activations. Saturating clone hiddens keep the clone agnostic far
  // from anything it was trained on, which keeps the disagreement objective
  // pointed at regions where the target itself varies.
  bool clone_tanh = true;
  bool gen_tanh_hidden = false;
  // Scale on the generator's output-layer init: shapes the pre-tanh spread so
  // the initial query distribution covers plausible input magnitudes.
  double gen_out_gain = 0.5;

  void validate() const;
};

struct PdConfig {
  double lambda = 10.0;  // weight of the critic term in the generator loss
  int n_d = 10;          // critic steps per outer iteration
  double eta_d = 1e-4;   // critic Adam
  double gp_weight = 10.0;
  double adam_beta1 = 0.0, adam_beta2 = 0.9;
  std::vector<int> critic_hidden{64, 64};
  // Ablation: backpropagate the critic term exactly instead of folding it
  // into the forward-difference evaluation.
  bool exact_critic_grad = false;

  void validate() const;
};

/// Unlabeled inputs drawn from the target's training distribution.
struct SeedSet {
  Mat inputs;  // n x d, values in [-1,1]
  long size() const { return inputs.rows(); }
};

struct EvalContext {
  Mat x_eval;
  std::vector<int> y_eval;
  double target_accuracy = 1.0;  // normalization denominator
};

// The dataset D of (x, T(x)) pairs accumulated by the attack. Append-only
// unless a capacity is set, in which case a uniformly random stored row is
// evicted per overflowing row.
class ReplayBuffer {
 public:
  void append(const Mat& x, const Mat& y, long cap, Rng& evict_rng);
  long size() const { return n_; }
  Eigen::Ref<const Mat> inputs() const { return x_.topRows(n_); }
  Eigen::Ref<const Mat> labels() const { return y_.topRows(n_); }

 private:
  Mat x_, y_;
  long n_ = 0;
};

struct AttackLogRow {
  long q = 0;
  double clone_acc = 0, norm_acc = 0;
  double loss_c = 0, loss_g = 0;
  double eta_c = 0, eta_g = 0;
};

struct AttackLog {
  std::vector<AttackLogRow> rows;
  bool truncated = false;
  static const char* csv_header();  // q,clone_acc,norm_acc,loss_c,loss_g,eta_c,eta_g
  void write_csv(const std::string& path) const;
  /// First logged q where norm_acc >= threshold, or -1 if never reached.
  long first_crossing(double norm_acc_threshold) const;
};

}  // namespace maze
