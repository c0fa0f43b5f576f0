#include "maze/oracle.hpp"

#include <algorithm>
#include <numeric>

#include "maze/autograd.hpp"
#include "maze/losses.hpp"
#include "maze/optim.hpp"

namespace maze {

BlackBoxOracle::BlackBoxOracle(Model target, long budget, bool enforce)
    : target_(std::move(target)),
      in_dim_(target_.input_dim()),
      out_dim_(target_.output_dim()) {
  target_.training = false;
  ledger_.budget = budget;
  ledger_.enforce = enforce;
}

Mat BlackBoxOracle::query(const Mat& batch) {
  if (batch.cols() != in_dim_)
    throw std::invalid_argument("oracle: query batch has " +
                                std::to_string(batch.cols()) +
                                " features, target expects " +
                                std::to_string(in_dim_));
  if (batch.rows() == 0)
    throw std::invalid_argument("oracle: empty query batch");
  constexpr double kSlack = 1e-12;
  if ((batch.array().abs() > 1.0 + kSlack).any())
    throw std::domain_error("oracle: query values outside the valid range [-1,1]");
  require_finite(batch, "oracle query batch");

  std::lock_guard<std::mutex> lock(mu_);
  long rows = batch.rows();
  if (ledger_.enforce && ledger_.q + rows > ledger_.budget)
    throw BudgetExhausted(rows, ledger_.remaining());
  Mat out = target_.forward(batch);
  ledger_.q += rows;
  return out;
}

void BlackBoxOracle::charge(long rows) {
  if (rows < 0) throw std::invalid_argument("oracle: negative charge");
  std::lock_guard<std::mutex> lock(mu_);
  if (ledger_.enforce && ledger_.q + rows > ledger_.budget)
    throw BudgetExhausted(rows, ledger_.remaining());
  ledger_.q += rows;
}

long query_cost_per_iteration(long batch, long n_g, long m, long n_c) {
  if (batch <= 0 || n_g <= 0 || m <= 0 || n_c < 0)
    throw std::invalid_argument("query_cost_per_iteration: counts must be positive");
  return batch * (n_g * (m + 1) + n_c);
}

TrainedTarget train_target(const TargetSpec& spec, const Dataset& data,
                           std::uint64_t seed) {
  if (data.x_train.rows() == 0 || data.x_test.rows() == 0)
    throw std::invalid_argument("train_target: dataset needs train/test split");
  Rng init_rng(derive_seed(seed, 0));
  Rng shuffle_rng(derive_seed(seed, 1));
  Rng bg_rng(derive_seed(seed, 2));
  Model model = make_mlp(data.dim(), spec.hidden, data.classes,
                         spec.tanh_hidden ? LayerKind::Tanh : LayerKind::Relu,
                         false, LayerKind::Softmax, init_rng);
  AdamOptimizer opt;

  const long n = data.x_train.rows();
  const int k = data.classes;
  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (long start = 0; start < n; start += spec.batch) {
      long bsz = std::min<long>(spec.batch, n - start);
      long bg = spec.background_mix > 0.0
                    ? static_cast<long>(spec.background_mix * bsz)
                    : 0;
      Mat xb(bsz + bg, data.dim());
      Mat soft = Mat::Zero(bsz + bg, k);
      for (long i = 0; i < bsz; ++i) {
        xb.row(i) = data.x_train.row(order[start + i]);
        soft(i, data.y_train[order[start + i]]) = 1.0;
      }
      if (bg > 0) {
        xb.bottomRows(bg) = rand_uniform(bg_rng, bg, data.dim(), -1.0, 1.0);
        if (spec.background_label >= 0 && spec.background_label < k) {
          for (long i = bsz; i < bsz + bg; ++i)
            soft(i, spec.background_label) = 1.0;
        } else {
          soft.bottomRows(bg).setConstant(1.0 / k);
        }
      }
      auto gf = forward_graph(model, xb);
      auto loss = mean_all(kl_rows(constant(soft), gf.output()));
      backward(loss);
      opt.step(model, collect_grads(gf), spec.lr);
    }
  }

  model.training = false;
  double acc = accuracy_of(model.forward(data.x_test), data.y_test);
  if (spec.accuracy_floor > 0.0 && acc < spec.accuracy_floor)
    throw std::runtime_error("train_target: test accuracy " +
                             std::to_string(acc) + " below floor " +
                             std::to_string(spec.accuracy_floor));
  return {std::move(model), acc};
}

}  // namespace maze
