#include "maze/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace maze {

namespace {
inline double clamped_log(double v) {
  return std::log(v < kProbFloor ? kProbFloor : v);
}

void validate_prob(const double* v, Eigen::Index n, const char* what,
                   double tol) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(v[j] >= 0.0))
      throw std::invalid_argument(std::string(what) +
                                  ": negative or NaN probability entry");
    sum += v[j];
  }
  if (std::abs(sum - 1.0) > tol)
    throw std::invalid_argument(std::string(what) +
                                ": probabilities sum to " +
                                std::to_string(sum) + ", expected 1");
}
}  // namespace

void validate_probability_rows(const Mat& m, const char* what, double tol) {
  std::vector<double> row(m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[j] = m(i, j);
    validate_prob(row.data(), m.cols(), what, tol);
  }
}

double kl_divergence(const Vec& p, const Vec& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("kl_divergence: length mismatch");
  validate_prob(p.data(), p.size(), "kl_divergence(p)", 1e-6);
  validate_prob(q.data(), q.size(), "kl_divergence(q)", 1e-6);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < p.size(); ++j)
    acc += p[j] * (clamped_log(p[j]) - clamped_log(q[j]));
  return acc;
}

Vec kl_rows_value(const Mat& p, const Mat& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols())
    throw std::invalid_argument("kl_rows_value: shape mismatch");
  Vec out(p.rows());
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      acc += p(i, j) * (clamped_log(p(i, j)) - clamped_log(q(i, j)));
    out[i] = acc;
  }
  return out;
}

std::vector<int> argmax_rows(const Mat& m) {
  std::vector<int> out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::Index j;
    m.row(i).maxCoeff(&j);
    out[i] = static_cast<int>(j);
  }
  return out;
}

double accuracy_of(const Mat& pred, const std::vector<int>& labels) {
  if (static_cast<size_t>(pred.rows()) != labels.size())
    throw std::invalid_argument("accuracy_of: row/label count mismatch");
  if (labels.empty()) throw std::invalid_argument("accuracy_of: empty batch");
  auto am = argmax_rows(pred);
  long hits = 0;
  for (size_t i = 0; i < labels.size(); ++i)
    if (am[i] == labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace maze
