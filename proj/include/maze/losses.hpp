#pragma once

#include "maze/common.hpp"

namespace maze {

inline constexpr double kProbFloor = 1e-7;  // clamp before every log

/// KL(p || q) between two probability vectors. Rejects length mismatches and
/// vectors that are negative or do not sum to 1 within 1e-6.
double kl_divergence(const Vec& p, const Vec& q);

/// Row-wise KL(p || q) without graph tracking; inputs must be row-stochastic.
Vec kl_rows_value(const Mat& p, const Mat& q);

/// Fraction of rows where argmax(pred) == label.
double accuracy_of(const Mat& pred, const std::vector<int>& labels);

std::vector<int> argmax_rows(const Mat& m);

void validate_probability_rows(const Mat& m, const char* what,
                               double tol = 1e-6);

}  // namespace maze
