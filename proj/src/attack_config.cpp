#include "maze/attack_config.hpp"

#include <fstream>
#include <stdexcept>

namespace maze {

void AttackConfig::validate() const {
  if (budget <= 0) throw std::invalid_argument("config: budget must be > 0");
  if (epsilon <= 0) throw std::invalid_argument("config: epsilon must be > 0");
  if (m < 1) throw std::invalid_argument("config: m must be >= 1");
  if (batch < 1) throw std::invalid_argument("config: batch must be >= 1");
  if (n_g < 0 || n_c < 0 || n_r < 0)
    throw std::invalid_argument("config: iteration counts must be >= 0");
  if (eta_g <= 0 || eta_c <= 0)
    throw std::invalid_argument("config: learning rates must be > 0");
  if (latent_dim < 1) throw std::invalid_argument("config: latent_dim must be >= 1");
  if (checkpoint_every < 1)
    throw std::invalid_argument("config: checkpoint_every must be >= 1");
  if (replay_cap < 0) throw std::invalid_argument("config: replay_cap must be >= 0");
}

void PdConfig::validate() const {
  if (lambda < 0) throw std::invalid_argument("pd config: lambda must be >= 0");
  if (n_d < 0) throw std::invalid_argument("pd config: N_d must be >= 0");
  if (eta_d <= 0) throw std::invalid_argument("pd config: eta_d must be > 0");
  if (gp_weight < 0) throw std::invalid_argument("pd config: gp_weight must be >= 0");
}

void ReplayBuffer::append(const Mat& x, const Mat& y, long cap, Rng& evict_rng) {
  if (x.rows() != y.rows())
    throw std::invalid_argument("replay buffer: input/label row mismatch");
  if (n_ == 0 && x_.size() == 0) {
    x_ = Mat(0, x.cols());
    y_ = Mat(0, y.cols());
  }
  long want = n_ + x.rows();
  if (cap <= 0 || want <= cap) {
    if (want > x_.rows()) {
      long grow = std::max<long>(want, 2 * x_.rows());
      x_.conservativeResize(grow, Eigen::NoChange);
      y_.conservativeResize(grow, Eigen::NoChange);
    }
    x_.middleRows(n_, x.rows()) = x;
    y_.middleRows(n_, y.rows()) = y;
    n_ = want;
    return;
  }
  // Capacity reached: fill to cap, then evict uniformly per extra row.
  long i = 0;
  if (n_ < cap) {
    long fit = cap - n_;
    if (cap > x_.rows()) {
      x_.conservativeResize(cap, Eigen::NoChange);
      y_.conservativeResize(cap, Eigen::NoChange);
    }
    x_.middleRows(n_, fit) = x.topRows(fit);
    y_.middleRows(n_, fit) = y.topRows(fit);
    n_ = cap;
    i = fit;
  }
  std::uniform_int_distribution<long> pick(0, cap - 1);
  for (; i < x.rows(); ++i) {
    long slot = pick(evict_rng);
    x_.row(slot) = x.row(i);
    y_.row(slot) = y.row(i);
  }
}

const char* AttackLog::csv_header() {
  return "q,clone_acc,norm_acc,loss_c,loss_g,eta_c,eta_g";
}

void AttackLog::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open log for write: " + path);
  os << csv_header() << "\n";
  os.precision(10);
  for (const auto& r : rows) {
    os << r.q << "," << r.clone_acc << "," << r.norm_acc << "," << r.loss_c
       << "," << r.loss_g << "," << r.eta_c << "," << r.eta_g << "\n";
  }
}

long AttackLog::first_crossing(double threshold) const {
  for (const auto& r : rows)
    if (r.norm_acc >= threshold) return r.q;
  return -1;
}

}  // namespace maze
