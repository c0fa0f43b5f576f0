#include "maze/baselines.hpp"

#include <algorithm>
#include <numeric>

#include "maze/losses.hpp"

namespace maze {

namespace {
enum Stream : std::uint64_t {
  kCloneInit = 1,  // matches the main attack stream so archs line up
  kNoise = 20,
  kShuffle = 21,
};

Model make_clone(const AttackConfig& base, int in_dim, int out_dim) {
  Rng init(derive_seed(base.seed, kCloneInit));
  return make_mlp(in_dim, base.clone_hidden, out_dim,
                  base.clone_tanh ? LayerKind::Tanh : LayerKind::Relu, false,
                  LayerKind::Softmax, init);
}

AttackLogRow eval_row(Model& clone, const EvalContext& eval, long q) {
  AttackLogRow row;
  row.q = q;
  if (eval.x_eval.rows() > 0) {
    row.clone_acc = accuracy_of(clone.forward_eval(eval.x_eval), eval.y_eval);
    row.norm_acc =
        eval.target_accuracy > 0 ? row.clone_acc / eval.target_accuracy : 0.0;
  }
  return row;
}

// Soft labels for a block of inputs, queried in batch-sized chunks so the
// total count equals the row count exactly.
Mat label_pass(Oracle& oracle, const Mat& x, long chunk) {
  Mat y(x.rows(), oracle.output_dim());
  for (long start = 0; start < x.rows(); start += chunk) {
    long n = std::min<long>(chunk, x.rows() - start);
    y.middleRows(start, n) = oracle.query(x.middleRows(start, n));
  }
  return y;
}
}  // namespace

Mat jbda_augment(Model& clone, const Mat& x, const std::vector<int>& labels,
                 double lambda) {
  if (static_cast<size_t>(x.rows()) != labels.size())
    throw std::invalid_argument("jbda_augment: one label per row required");
  auto gf = forward_graph_on(clone, leaf(x), false);
  NodePtr loss = sum_all(cross_entropy_rows(gf.output(), labels));
  backward(loss);
  Mat g = gf.input->grad.size() != 0 ? gf.input->grad
                                     : Mat::Zero(x.rows(), x.cols());
  Mat out = x + lambda * g.array().sign().matrix();
  return out.cwiseMax(-1.0).cwiseMin(1.0);
}

AttackResult run_jbda(Oracle& oracle, const SeedSet& seeds,
                      const JbdaConfig& jbda, const AttackConfig& base,
                      const EvalContext& eval) {
  if (seeds.size() == 0)
    throw std::invalid_argument("run_jbda: seed examples required");
  if (jbda.rounds < 0 || jbda.lambda <= 0)
    throw std::invalid_argument("run_jbda: invalid config");
  Model clone = make_clone(base, oracle.input_dim(), oracle.output_dim());
  AdamOptimizer opt;
  Rng shuffle_rng(derive_seed(base.seed, kShuffle));
  AttackLog log;

  Mat pool_x = seeds.inputs;
  std::vector<int> pool_y;

  auto train = [&](int epochs) {
    const long n = pool_x.rows();
    const long bsz = std::min<long>(base.batch, n);
    std::vector<long> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int e = 0; e < epochs; ++e) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      for (long start = 0; start + bsz <= n; start += bsz) {
        Mat xb(bsz, pool_x.cols());
        std::vector<int> yb(bsz);
        for (long i = 0; i < bsz; ++i) {
          xb.row(i) = pool_x.row(order[start + i]);
          yb[i] = pool_y[order[start + i]];
        }
        auto gf = forward_graph(clone, xb);
        NodePtr loss = mean_all(cross_entropy_rows(gf.output(), yb));
        backward(loss);
        opt.step(clone, collect_grads(gf), jbda.lr);
      }
    }
  };

  log.rows.push_back(eval_row(clone, eval, oracle.ledger().q));
  try {
    pool_y = argmax_rows(label_pass(oracle, pool_x, base.batch));
    train(jbda.epochs_per_round);
    log.rows.push_back(eval_row(clone, eval, oracle.ledger().q));
    for (int r = 0; r < jbda.rounds; ++r) {
      Mat augmented = jbda_augment(clone, pool_x, pool_y, jbda.lambda);
      std::vector<int> aug_y =
          argmax_rows(label_pass(oracle, augmented, base.batch));
      long old_n = pool_x.rows();
      pool_x.conservativeResize(2 * old_n, Eigen::NoChange);
      pool_x.bottomRows(old_n) = augmented;
      pool_y.insert(pool_y.end(), aug_y.begin(), aug_y.end());
      train(jbda.epochs_per_round);
      log.rows.push_back(eval_row(clone, eval, oracle.ledger().q));
    }
  } catch (const BudgetExhausted&) {
    log.truncated = true;
    log.rows.push_back(eval_row(clone, eval, oracle.ledger().q));
  }
  return {std::move(clone), std::move(log)};
}

AttackResult run_noise(Oracle& oracle, const AttackConfig& base,
                       const EvalContext& eval) {
  base.validate();
  Model clone = make_clone(base, oracle.input_dim(), oracle.output_dim());
  SgdOptimizer opt(base.clone_momentum);
  Rng noise_rng(derive_seed(base.seed, kNoise));
  Rng replay_rng(derive_seed(base.seed, kShuffle));
  Rng evict_rng(derive_seed(base.seed, kShuffle + 1));
  ReplayBuffer buffer;
  AttackLog log;

  const long B = base.batch;
  const int d = oracle.input_dim();
  const long planned = std::max<long>(base.budget / B, 1);
  CosineSchedule sched{base.eta_c, planned};
  const int replay_per_batch = base.n_c > 0 ? base.n_r / base.n_c : 0;

  auto clone_step = [&](const Mat& x, const Mat& y, double lr) {
    auto gf = forward_graph(clone, x);
    NodePtr loss = mean_all(kl_rows(constant(y), gf.output()));
    backward(loss);
    opt.step(clone, collect_grads(gf), lr);
  };

  log.rows.push_back(eval_row(clone, eval, oracle.ledger().q));
  long mini = 0;
  while (oracle.ledger().q < base.budget && oracle.ledger().remaining() >= B) {
    Mat x = rand_uniform(noise_rng, B, d, -1.0, 1.0);
    Mat y;
    try {
      y = oracle.query(x);
    } catch (const BudgetExhausted&) {
      log.truncated = true;
      break;
    }
    buffer.append(x, y, base.replay_cap, evict_rng);
    double lr = sched.at(std::min(mini, planned));
    clone_step(x, y, lr);
    std::uniform_int_distribution<long> pick(0, buffer.size() - 1);
    for (int r = 0; r < replay_per_batch; ++r) {
      long bsz = std::min<long>(B, buffer.size());
      Mat xb(bsz, d), yb(bsz, oracle.output_dim());
      for (long i = 0; i < bsz; ++i) {
        long j = pick(replay_rng);
        xb.row(i) = buffer.inputs().row(j);
        yb.row(i) = buffer.labels().row(j);
      }
      clone_step(xb, yb, lr);
    }
    ++mini;
    if (mini % base.checkpoint_every == 0)
      log.rows.push_back(eval_row(clone, eval, oracle.ledger().q));
  }
  auto last = eval_row(clone, eval, oracle.ledger().q);
  if (log.rows.empty() || log.rows.back().q != last.q)
    log.rows.push_back(last);
  else
    log.rows.back() = last;
  return {std::move(clone), std::move(log)};
}

AttackResult run_surrogate(Oracle& oracle, const Mat& surrogate_inputs,
                           const SurrogateConfig& cfg, const AttackConfig& base,
                           const EvalContext& eval) {
  if (surrogate_inputs.rows() == 0)
    throw std::invalid_argument("run_surrogate: empty surrogate dataset");
  if (surrogate_inputs.rows() > oracle.ledger().remaining())
    throw std::invalid_argument(
        "run_surrogate: surrogate dataset exceeds the query budget");
  Model clone = make_clone(base, oracle.input_dim(), oracle.output_dim());
  SgdOptimizer opt(base.clone_momentum);
  Rng shuffle_rng(derive_seed(base.seed, kShuffle));
  AttackLog log;

  log.rows.push_back(eval_row(clone, eval, oracle.ledger().q));
  Mat y = label_pass(oracle, surrogate_inputs, base.batch);
  const long n = surrogate_inputs.rows();
  const long bsz = std::min<long>(base.batch, n);
  const long steps_per_epoch = std::max<long>(n / bsz, 1);
  CosineSchedule sched{cfg.lr, std::max<long>(cfg.epochs * steps_per_epoch, 1)};
  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0);
  long step = 0;
  for (int e = 0; e < cfg.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (long start = 0; start + bsz <= n; start += bsz) {
      Mat xb(bsz, surrogate_inputs.cols());
      Mat yb(bsz, y.cols());
      for (long i = 0; i < bsz; ++i) {
        xb.row(i) = surrogate_inputs.row(order[start + i]);
        yb.row(i) = y.row(order[start + i]);
      }
      auto gf = forward_graph(clone, xb);
      NodePtr loss = mean_all(kl_rows(constant(yb), gf.output()));
      backward(loss);
      opt.step(clone, collect_grads(gf), sched.at(std::min(step, sched.total)));
      ++step;
    }
  }
  log.rows.push_back(eval_row(clone, eval, oracle.ledger().q));
  return {std::move(clone), std::move(log)};
}

}  // namespace maze
