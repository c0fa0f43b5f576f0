#pragma once

#include <mutex>
#include <string>
#include <vector>

#include "maze/data.hpp"
#include "maze/model.hpp"

namespace maze {

struct QueryLedger {
  long q = 0;       // queries consumed (one per batch row)
  long budget = 0;  // Q
  bool enforce = true;
  long remaining() const { return budget - q; }
};

// Query-only view of a target model. Attack code is written against this
// interface; nothing else about the target (parameters, gradients,
// architecture) is reachable through it.
class Oracle {
 public:
  virtual ~Oracle() = default;
  /// Soft labels for a batch, one probability row per input row. Counts
  /// batch rows against the ledger atomically; throws BudgetExhausted if the
  /// whole batch does not fit, std::domain_error for inputs outside [-1,1].
  virtual Mat query(const Mat& batch) = 0;
  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;
  virtual const QueryLedger& ledger() const = 0;
  /// Accounting-only charge (no model evaluation); used by ablations that
  /// bypass query() but must keep budget parity.
  virtual void charge(long rows) = 0;
};

class BlackBoxOracle final : public Oracle {
 public:
  BlackBoxOracle(Model target, long budget, bool enforce = true);
  Mat query(const Mat& batch) override;
  int input_dim() const override { return in_dim_; }
  int output_dim() const override { return out_dim_; }
  const QueryLedger& ledger() const override { return ledger_; }
  void charge(long rows) override;

 private:
  Model target_;
  int in_dim_, out_dim_;
  QueryLedger ledger_;
  mutable std::mutex mu_;
};

/// B * (N_G * (m + 1) + N_C): target queries per attack outer iteration.
long query_cost_per_iteration(long batch, long n_g, long m, long n_c);

struct TargetSpec {
  std::vector<int> hidden{64, 64};
  bool tanh_hidden = false;  // saturating hiddens; relu otherwise
  int epochs = 50;
  double lr = 1e-3;  // Adam
  int batch = 128;
  double accuracy_floor = 0.0;  // 0 disables the convergence check
  // Off-manifold calibration: fraction of each batch appended as uniform
  // random inputs trained toward `background_label` (a dumping-ground class,
  // the way deployed classifiers map junk inputs to one confident class) or
  // toward the uniform distribution when background_label < 0. 0 disables.
  double background_mix = 0.25;
  int background_label = 0;
};

struct TrainedTarget {
  Model model;
  double test_accuracy;
};

/// Trains a softmax-head MLP on the dataset with Adam. Throws if the test
/// accuracy lands below spec.accuracy_floor.
TrainedTarget train_target(const TargetSpec& spec, const Dataset& data,
                           std::uint64_t seed);

}  // namespace maze
