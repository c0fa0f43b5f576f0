#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace maze {

// Row-major storage so parameter blobs serialize in the documented layout
// without a transpose step.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using Rng = std::mt19937_64;

/// Thrown when a query would push the ledger past its budget.
class BudgetExhausted : public std::runtime_error {
 public:
  BudgetExhausted(long requested, long remaining)
      : std::runtime_error("query budget exhausted: requested " +
                           std::to_string(requested) + " rows, " +
                           std::to_string(remaining) + " remaining"),
        requested(requested),
        remaining(remaining) {}
  long requested;
  long remaining;
};

inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) {
    throw std::domain_error(std::string("non-finite values in ") + what);
  }
}

// Independent per-component RNG streams derived from one master seed.
// splitmix64 over (seed, stream id) keeps streams decorrelated even for
// adjacent seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Mat randn(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

inline Mat rand_uniform(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                        double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

}  // namespace maze
