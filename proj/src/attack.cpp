#include "maze/attack.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "maze/losses.hpp"
#include "maze/maze_pd.hpp"

namespace maze {

namespace {
enum Stream : std::uint64_t {
  kGenInit = 0,
  kCloneInit,
  kLatent,
  kDirections,
  kReplay,
  kEvict,
  kCriticInit,
  kPdLatent,
  kPdReal,
  kPdAlpha,
};
}  // namespace

MazeAttack::MazeAttack(Oracle& oracle, const AttackConfig& cfg,
                       const EvalContext* eval)
    : oracle_(oracle),
      cfg_(cfg),
      eval_(eval),
      opt_g_(0.0),
      opt_c_(cfg.clone_momentum),
      rng_latent_(derive_seed(cfg.seed, kLatent)),
      rng_dirs_(derive_seed(cfg.seed, kDirections)),
      rng_replay_(derive_seed(cfg.seed, kReplay)),
      rng_evict_(derive_seed(cfg.seed, kEvict)),
      rng_pd_latent_(derive_seed(cfg.seed, kPdLatent)),
      rng_pd_real_(derive_seed(cfg.seed, kPdReal)),
      rng_pd_alpha_(derive_seed(cfg.seed, kPdAlpha)) {
  cfg_.validate();
  Rng gen_init(derive_seed(cfg.seed, kGenInit));
  Rng clone_init(derive_seed(cfg.seed, kCloneInit));
  gen_ = make_mlp(cfg.latent_dim, cfg.gen_hidden, oracle.input_dim(),
                  cfg.gen_tanh_hidden ? LayerKind::Tanh : LayerKind::Relu,
                  cfg.gen_batchnorm, LayerKind::Tanh, gen_init);
  if (cfg.gen_out_gain != 1.0) {
    for (auto it = gen_.layers.rbegin(); it != gen_.layers.rend(); ++it) {
      if (it->kind == LayerKind::Linear) {
        it->W *= cfg.gen_out_gain;
        it->b *= cfg.gen_out_gain;
        break;
      }
    }
  }
  gen_.training = true;  // attack-time generator runs in train mode
  clone_ = make_mlp(oracle.input_dim(), cfg.clone_hidden, oracle.output_dim(),
                    cfg.clone_tanh ? LayerKind::Tanh : LayerKind::Relu, false,
                    LayerKind::Softmax, clone_init);

  cost_iter_ = static_cast<long>(cfg.batch) *
               (static_cast<long>(cfg.n_g) * (cfg.m + 1) + cfg.n_c);
  planned_ = cost_iter_ > 0 ? cfg.budget / cost_iter_ : 0;
  sched_g_ = {cfg.eta_g, std::max<long>(planned_, 1)};
  sched_c_ = {cfg.eta_c, std::max<long>(planned_, 1)};
}

void MazeAttack::enable_whitebox(const Model& target) {
  whitebox_target_ = target;
  whitebox_target_->training = false;
}

void MazeAttack::enable_pd(const SeedSet& seeds, const PdConfig& pd) {
  pd.validate();
  if (seeds.size() == 0)
    throw std::invalid_argument(
        "partial-data attack requires a non-empty seed set");
  if (seeds.inputs.cols() != oracle_.input_dim())
    throw std::invalid_argument("seed set dimension does not match the target");
  if ((seeds.inputs.array().abs() > 1.0 + 1e-12).any())
    throw std::invalid_argument("seed inputs must lie in [-1,1]");
  pd_ = pd;
  pd_seeds_ = seeds.inputs;
  Rng critic_init(derive_seed(cfg_.seed, kCriticInit));
  critic_ = make_mlp(oracle_.input_dim(), pd.critic_hidden, 1, LayerKind::Tanh,
                     false, LayerKind::Linear, critic_init);
  critic_->training = false;
  opt_d_.emplace(pd.adam_beta1, pd.adam_beta2, 1e-8);
}

double MazeAttack::eta_g_now() const {
  return sched_g_.at(std::min(iter_, sched_g_.total));
}

double MazeAttack::eta_c_now() const {
  return sched_c_.at(std::min(iter_, sched_c_.total));
}

void MazeAttack::generator_phase() {
  const double lr = eta_g_now();
  const long B = cfg_.batch;
  for (int step = 0; step < cfg_.n_g; ++step) {
    Mat z = randn(rng_latent_, B, cfg_.latent_dim);
    auto gf = forward_graph(gen_, z);
    const Mat xp = gf.pre_head()->value;

    Mat seed;  // d(mean L_G)/d(x_p), injected below
    double mean_loss = 0.0;
    if (whitebox_target_) {
      // Same query charge as the estimator path, for budget parity.
      oracle_.charge(B * (cfg_.m + 1));
      NodePtr xp_leaf = leaf(xp);
      NodePtr x = tanh_op(xp_leaf);
      auto tf = forward_graph_on(*whitebox_target_, x, false);
      auto cf = forward_graph_on(clone_, x, false);
      NodePtr loss = scale(mean_all(kl_rows(tf.output(), cf.output())), -1.0);
      backward(loss);
      seed = xp_leaf->grad.size() != 0 ? xp_leaf->grad
                                       : Mat::Zero(xp.rows(), xp.cols());
      mean_loss = loss->value(0, 0);
    } else {
      const bool exact_split =
          pd_ && pd_->exact_critic_grad && pd_->lambda != 0.0;
      bool first_call = true;
      BatchLoss evaluator = [&](const Mat& xp_probe) -> Vec {
        Mat x = xp_probe.array().tanh();
        Mat y_t = oracle_.query(x);
        Mat y_c = clone_.forward_eval(x);
        Vec loss = -kl_rows_value(y_t, y_c);
        if (pd_ && pd_->lambda != 0.0 && !exact_split) {
          Mat d = critic_->forward_eval(x);
          loss -= pd_->lambda * d.col(0);
        }
        if (first_call) {  // estimate_grad evaluates the base point first
          mean_loss = loss.mean();
          first_call = false;
        }
        return loss;
      };
      GradientEstimate est =
          estimate_grad(evaluator, xp, {cfg_.epsilon, cfg_.m}, rng_dirs_);
      seed = est.ghat / static_cast<double>(B);
      if (exact_split) {
        Mat x = xp.array().tanh();
        Mat dcdx = critic_input_gradient(*critic_, x);
        Mat tanh_d = 1.0 - x.array().square();
        seed -= (pd_->lambda / static_cast<double>(B)) *
                dcdx.cwiseProduct(tanh_d);
      }
    }

    GradMap grads = inject_and_backprop(gf, seed);
    opt_g_.step(gen_, grads, lr);
    sum_loss_g_ += mean_loss;
    ++n_loss_g_;
  }
}

void MazeAttack::clone_phase() {
  const double lr = eta_c_now();
  const long B = cfg_.batch;
  for (int step = 0; step < cfg_.n_c; ++step) {
    Mat z = randn(rng_latent_, B, cfg_.latent_dim);
    Mat x = gen_.forward(z);
    Mat y_t = oracle_.query(x);
    buffer_.append(x, y_t, cfg_.replay_cap, rng_evict_);
    auto gf = forward_graph(clone_, x);
    NodePtr loss = mean_all(kl_rows(constant(y_t), gf.output()));
    backward(loss);
    opt_c_.step(clone_, collect_grads(gf), lr);
    sum_loss_c_ += loss->value(0, 0);
    ++n_loss_c_;
  }
}

void MazeAttack::replay_phase() {
  if (cfg_.n_r == 0 || buffer_.size() == 0) return;
  const double lr = eta_c_now();
  const long B = std::min<long>(cfg_.batch, buffer_.size());
  std::vector<long> order(buffer_.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng_replay_);
  size_t pos = 0;
  auto x_all = buffer_.inputs();
  auto y_all = buffer_.labels();
  for (int step = 0; step < cfg_.n_r; ++step) {
    if (pos + B > order.size()) {  // start a fresh pass
      std::shuffle(order.begin(), order.end(), rng_replay_);
      pos = 0;
    }
    Mat xb(B, x_all.cols()), yb(B, y_all.cols());
    for (long i = 0; i < B; ++i) {
      xb.row(i) = x_all.row(order[pos + i]);
      yb.row(i) = y_all.row(order[pos + i]);
    }
    pos += B;
    auto gf = forward_graph(clone_, xb);
    NodePtr loss = mean_all(kl_rows(constant(yb), gf.output()));
    backward(loss);
    opt_c_.step(clone_, collect_grads(gf), lr);
  }
}

void MazeAttack::critic_phase() {
  if (!pd_ || pd_->n_d == 0) return;
  const long B = cfg_.batch;
  std::uniform_int_distribution<long> pick(0, pd_seeds_.rows() - 1);
  for (int step = 0; step < pd_->n_d; ++step) {
    Mat z = randn(rng_pd_latent_, B, cfg_.latent_dim);
    Mat fake = gen_.forward(z);
    Mat real(B, pd_seeds_.cols());
    for (long i = 0; i < B; ++i)
      real.row(i) = pd_seeds_.row(pick(rng_pd_real_));
    GradMap grads;
    critic_loss_backward(*critic_, real, fake, pd_->gp_weight, rng_pd_alpha_,
                         &grads);
    opt_d_->step(*critic_, grads, pd_->eta_d);
  }
}

void MazeAttack::log_row() {
  AttackLogRow row;
  row.q = oracle_.ledger().q;
  if (eval_ && eval_->x_eval.rows() > 0) {
    row.clone_acc =
        accuracy_of(clone_.forward_eval(eval_->x_eval), eval_->y_eval);
    row.norm_acc = eval_->target_accuracy > 0
                       ? row.clone_acc / eval_->target_accuracy
                       : 0.0;
  }
  row.loss_c = n_loss_c_ > 0 ? sum_loss_c_ / n_loss_c_ : 0.0;
  row.loss_g = n_loss_g_ > 0 ? sum_loss_g_ / n_loss_g_ : 0.0;
  row.eta_c = eta_c_now();
  row.eta_g = eta_g_now();
  sum_loss_c_ = sum_loss_g_ = 0;
  n_loss_c_ = n_loss_g_ = 0;
  if (!log_.rows.empty() && log_.rows.back().q == row.q) {
    log_.rows.back() = row;  // keep q strictly increasing across rows
  } else {
    log_.rows.push_back(row);
  }
}

AttackResult MazeAttack::run() {
  log_row();  // q = 0 baseline
  if (cost_iter_ > 0) {
    while (oracle_.ledger().q < cfg_.budget) {
      if (oracle_.ledger().remaining() < cost_iter_) break;
      try {
        generator_phase();
        clone_phase();
        replay_phase();
        critic_phase();
      } catch (const BudgetExhausted&) {
        log_.truncated = true;
        break;
      }
      ++iter_;
      if (iter_ % cfg_.checkpoint_every == 0) log_row();
    }
  }
  log_row();
  return {clone_, log_};
}

AttackResult run_maze(Oracle& oracle, const AttackConfig& cfg,
                      const EvalContext& eval) {
  MazeAttack attack(oracle, cfg, &eval);
  return attack.run();
}

AttackResult run_maze_whitebox(const Model& target, const AttackConfig& cfg,
                               const EvalContext& eval) {
  BlackBoxOracle oracle(target, cfg.budget);
  MazeAttack attack(oracle, cfg, &eval);
  attack.enable_whitebox(target);
  return attack.run();
}

}  // namespace maze
