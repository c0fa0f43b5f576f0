#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "maze/common.hpp"

namespace maze {

// Reverse-mode tape over dense matrices. Graphs are built per training step
// and freed when the last NodePtr goes out of scope.
struct Node {
  Mat value;
  Mat grad;  // allocated lazily, same shape as value
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward_fn;  // scatters node.grad into inputs
  bool requires_grad = false;
  const char* op = "leaf";

  Mat& ensure_grad() {
    if (grad.size() == 0) grad = Mat::Zero(value.rows(), value.cols());
    return grad;
  }
  void accumulate(const Mat& g) { ensure_grad() += g; }
};

using NodePtr = std::shared_ptr<Node>;

/// Wraps a value the graph treats as data (no gradient tracked).
NodePtr constant(Mat v);
/// Wraps a value gradients should flow into (parameters, probed inputs).
NodePtr leaf(Mat v);

NodePtr add(const NodePtr& a, const NodePtr& b);
/// a + rv with rv (1 x n) broadcast over the rows of a.
NodePtr add_rowvec(const NodePtr& a, const NodePtr& rv);
NodePtr sub(const NodePtr& a, const NodePtr& b);
NodePtr mul(const NodePtr& a, const NodePtr& b);  // elementwise
NodePtr scale(const NodePtr& a, double s);
NodePtr matmul(const NodePtr& a, const NodePtr& b);    // (r x k) * (k x c)
NodePtr matmul_nt(const NodePtr& a, const NodePtr& b); // a * b^T
NodePtr tanh_op(const NodePtr& a);
NodePtr relu(const NodePtr& a);
/// 0/1 mask of a > 0; treated as locally constant (no gradient into a).
NodePtr relu_mask(const NodePtr& a);
/// 1 - a.^2, the tanh derivative when a is already tanh-activated.
NodePtr one_minus_square(const NodePtr& a);
NodePtr softmax_rows(const NodePtr& a);
NodePtr row_sum(const NodePtr& a);  // (n x c) -> (n x 1)
NodePtr mean_all(const NodePtr& a);
NodePtr sum_all(const NodePtr& a);
NodePtr square(const NodePtr& a);
NodePtr sub_scalar(const NodePtr& a, double c);
/// Elementwise sqrt(max(a,0)); gradient guarded to 0 near a == 0.
NodePtr sqrt_guarded(const NodePtr& a);

/// Row-wise KL(p || q) with probabilities clamped to [floor, inf) before the
/// log. Differentiable in both arguments. Returns (n x 1).
NodePtr kl_rows(const NodePtr& p, const NodePtr& q, double floor = 1e-7);
/// Row-wise -log q[label] with the same clamp. Returns (n x 1).
NodePtr cross_entropy_rows(const NodePtr& q, const std::vector<int>& labels,
                           double floor = 1e-7);

/// Backpropagate from a scalar (1x1) root. Rejects non-scalar roots.
void backward(const NodePtr& root);
/// Seed an arbitrary node with `seed` and backpropagate from there.
void backward_from(const NodePtr& node, const Mat& seed);

}  // namespace maze
