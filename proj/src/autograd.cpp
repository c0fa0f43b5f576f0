#include "maze/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace maze {

namespace {

NodePtr make_node(Mat value, std::vector<NodePtr> inputs, const char* op,
                  std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->inputs = std::move(inputs);
  n->op = op;
  for (const auto& in : n->inputs) n->requires_grad |= in->requires_grad;
  if (n->requires_grad) n->backward_fn = std::move(backward_fn);
  return n;
}

void check_same_shape(const NodePtr& a, const NodePtr& b, const char* op) {
  if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                std::to_string(a->value.rows()) + "x" +
                                std::to_string(a->value.cols()) + " vs " +
                                std::to_string(b->value.rows()) + "x" +
                                std::to_string(b->value.cols()));
}

// Post-order over the input DAG, iterative to keep deep generator graphs off
// the call stack.
std::vector<Node*> topo_order(Node* root) {
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack{{root, 0}};
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second)
        stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;  // children before parents
}

void run_backward(Node* root) {
  auto order = topo_order(root);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->grad.size() != 0) n->backward_fn(*n);
  }
}

}  // namespace

NodePtr constant(Mat v) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  n->op = "const";
  return n;
}

NodePtr leaf(Mat v) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  n->requires_grad = true;
  return n;
}

NodePtr add(const NodePtr& a, const NodePtr& b) {
  check_same_shape(a, b, "add");
  return make_node(a->value + b->value, {a, b}, "add", [](Node& n) {
    if (n.inputs[0]->requires_grad) n.inputs[0]->accumulate(n.grad);
    if (n.inputs[1]->requires_grad) n.inputs[1]->accumulate(n.grad);
  });
}

NodePtr add_rowvec(const NodePtr& a, const NodePtr& rv) {
  if (rv->value.rows() != 1 || rv->value.cols() != a->value.cols())
    throw std::invalid_argument("add_rowvec: bias must be 1 x cols(a)");
  Mat out = a->value;
  out.rowwise() += rv->value.row(0);
  return make_node(std::move(out), {a, rv}, "add_rowvec", [](Node& n) {
    if (n.inputs[0]->requires_grad) n.inputs[0]->accumulate(n.grad);
    if (n.inputs[1]->requires_grad)
      n.inputs[1]->ensure_grad().row(0) += n.grad.colwise().sum();
  });
}

NodePtr sub(const NodePtr& a, const NodePtr& b) {
  check_same_shape(a, b, "sub");
  return make_node(a->value - b->value, {a, b}, "sub", [](Node& n) {
    if (n.inputs[0]->requires_grad) n.inputs[0]->accumulate(n.grad);
    if (n.inputs[1]->requires_grad) n.inputs[1]->ensure_grad() -= n.grad;
  });
}

NodePtr mul(const NodePtr& a, const NodePtr& b) {
  check_same_shape(a, b, "mul");
  return make_node(a->value.cwiseProduct(b->value), {a, b}, "mul", [](Node& n) {
    if (n.inputs[0]->requires_grad)
      n.inputs[0]->accumulate(n.grad.cwiseProduct(n.inputs[1]->value));
    if (n.inputs[1]->requires_grad)
      n.inputs[1]->accumulate(n.grad.cwiseProduct(n.inputs[0]->value));
  });
}

NodePtr scale(const NodePtr& a, double s) {
  return make_node(a->value * s, {a}, "scale", [s](Node& n) {
    if (n.inputs[0]->requires_grad) n.inputs[0]->accumulate(n.grad * s);
  });
}

NodePtr matmul(const NodePtr& a, const NodePtr& b) {
  if (a->value.cols() != b->value.rows())
    throw std::invalid_argument("matmul: inner dimensions differ");
  return make_node(a->value * b->value, {a, b}, "matmul", [](Node& n) {
    if (n.inputs[0]->requires_grad)
      n.inputs[0]->accumulate(n.grad * n.inputs[1]->value.transpose());
    if (n.inputs[1]->requires_grad)
      n.inputs[1]->accumulate(n.inputs[0]->value.transpose() * n.grad);
  });
}

NodePtr matmul_nt(const NodePtr& a, const NodePtr& b) {
  if (a->value.cols() != b->value.cols())
    throw std::invalid_argument("matmul_nt: column counts differ");
  return make_node(a->value * b->value.transpose(), {a, b}, "matmul_nt",
                   [](Node& n) {
                     if (n.inputs[0]->requires_grad)
                       n.inputs[0]->accumulate(n.grad * n.inputs[1]->value);
                     if (n.inputs[1]->requires_grad)
                       n.inputs[1]->accumulate(n.grad.transpose() *
                                               n.inputs[0]->value);
                   });
}

NodePtr tanh_op(const NodePtr& a) {
  Mat out = a->value.array().tanh();
  return make_node(std::move(out), {a}, "tanh", [](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    Mat d = 1.0 - n.value.array().square();
    n.inputs[0]->accumulate(n.grad.cwiseProduct(d));
  });
}

NodePtr relu(const NodePtr& a) {
  Mat out = a->value.cwiseMax(0.0);
  return make_node(std::move(out), {a}, "relu", [](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    Mat mask = (n.inputs[0]->value.array() > 0.0).cast<double>();
    n.inputs[0]->accumulate(n.grad.cwiseProduct(mask));
  });
}

NodePtr relu_mask(const NodePtr& a) {
  Mat out = (a->value.array() > 0.0).cast<double>();
  auto n = std::make_shared<Node>();
  n->value = std::move(out);
  n->op = "relu_mask";  // piecewise constant: no inputs kept, no gradient
  return n;
}

NodePtr one_minus_square(const NodePtr& a) {
  Mat out = 1.0 - a->value.array().square();
  return make_node(std::move(out), {a}, "one_minus_square", [](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    Mat d = -2.0 * n.inputs[0]->value.array();
    n.inputs[0]->accumulate(n.grad.cwiseProduct(d));
  });
}

NodePtr softmax_rows(const NodePtr& a) {
  Mat out(a->value.rows(), a->value.cols());
  for (Eigen::Index i = 0; i < a->value.rows(); ++i) {
    Eigen::ArrayXd row = a->value.row(i).array();
    Eigen::ArrayXd e = (row - row.maxCoeff()).exp();
    out.row(i) = (e / e.sum()).matrix();
  }
  return make_node(std::move(out), {a}, "softmax", [](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    Mat& g = n.inputs[0]->ensure_grad();
    for (Eigen::Index i = 0; i < n.value.rows(); ++i) {
      const auto s = n.value.row(i).array();
      const auto up = n.grad.row(i).array();
      double dot = (up * s).sum();
      g.row(i) += (s * (up - dot)).matrix();
    }
  });
}

NodePtr row_sum(const NodePtr& a) {
  Mat out = a->value.rowwise().sum();
  return make_node(std::move(out), {a}, "row_sum", [](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    Mat& g = n.inputs[0]->ensure_grad();
    g += n.grad.col(0).replicate(1, g.cols());
  });
}

NodePtr mean_all(const NodePtr& a) {
  Mat out(1, 1);
  out(0, 0) = a->value.mean();
  double inv = 1.0 / static_cast<double>(a->value.size());
  return make_node(std::move(out), {a}, "mean_all", [inv](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    n.inputs[0]->ensure_grad().array() += n.grad(0, 0) * inv;
  });
}

NodePtr sum_all(const NodePtr& a) {
  Mat out(1, 1);
  out(0, 0) = a->value.sum();
  return make_node(std::move(out), {a}, "sum_all", [](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    n.inputs[0]->ensure_grad().array() += n.grad(0, 0);
  });
}

NodePtr square(const NodePtr& a) {
  Mat out = a->value.array().square();
  return make_node(std::move(out), {a}, "square", [](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    n.inputs[0]->accumulate(
        n.grad.cwiseProduct(Mat(2.0 * n.inputs[0]->value.array())));
  });
}

NodePtr sub_scalar(const NodePtr& a, double c) {
  Mat out = a->value.array() - c;
  return make_node(std::move(out), {a}, "sub_scalar", [](Node& n) {
    if (n.inputs[0]->requires_grad) n.inputs[0]->accumulate(n.grad);
  });
}

NodePtr sqrt_guarded(const NodePtr& a) {
  Mat out = a->value.cwiseMax(0.0).array().sqrt();
  return make_node(std::move(out), {a}, "sqrt_guarded", [](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    constexpr double kGuard = 1e-24;
    Mat d(n.value.rows(), n.value.cols());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      double v = n.inputs[0]->value(i);
      d(i) = v > kGuard ? 0.5 / std::sqrt(v) : 0.0;
    }
    n.inputs[0]->accumulate(n.grad.cwiseProduct(d));
  });
}

namespace {
inline double clamp_floor(double v, double floor) {
  return v < floor ? floor : v;
}
}  // namespace

NodePtr kl_rows(const NodePtr& p, const NodePtr& q, double floor) {
  check_same_shape(p, q, "kl_rows");
  const Mat& pv = p->value;
  const Mat& qv = q->value;
  Mat out(pv.rows(), 1);
  for (Eigen::Index i = 0; i < pv.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < pv.cols(); ++j) {
      acc += pv(i, j) * (std::log(clamp_floor(pv(i, j), floor)) -
                         std::log(clamp_floor(qv(i, j), floor)));
    }
    out(i, 0) = acc;
  }
  return make_node(std::move(out), {p, q}, "kl_rows", [floor](Node& n) {
    const Mat& pv = n.inputs[0]->value;
    const Mat& qv = n.inputs[1]->value;
    if (n.inputs[0]->requires_grad) {
      Mat& g = n.inputs[0]->ensure_grad();
      for (Eigen::Index i = 0; i < pv.rows(); ++i) {
        double up = n.grad(i, 0);
        for (Eigen::Index j = 0; j < pv.cols(); ++j) {
          double lp = std::log(clamp_floor(pv(i, j), floor));
          double lq = std::log(clamp_floor(qv(i, j), floor));
          double d = lp - lq + (pv(i, j) > floor ? 1.0 : 0.0);
          g(i, j) += up * d;
        }
      }
    }
    if (n.inputs[1]->requires_grad) {
      Mat& g = n.inputs[1]->ensure_grad();
      for (Eigen::Index i = 0; i < pv.rows(); ++i) {
        double up = n.grad(i, 0);
        for (Eigen::Index j = 0; j < pv.cols(); ++j) {
          if (qv(i, j) > floor)
            g(i, j) += up * (-pv(i, j) / qv(i, j));
        }
      }
    }
  });
}

NodePtr cross_entropy_rows(const NodePtr& q, const std::vector<int>& labels,
                           double floor) {
  const Mat& qv = q->value;
  if (static_cast<Eigen::Index>(labels.size()) != qv.rows())
    throw std::invalid_argument("cross_entropy_rows: one label per row");
  Mat out(qv.rows(), 1);
  for (Eigen::Index i = 0; i < qv.rows(); ++i) {
    int y = labels[i];
    if (y < 0 || y >= qv.cols())
      throw std::invalid_argument("cross_entropy_rows: label out of range");
    out(i, 0) = -std::log(clamp_floor(qv(i, y), floor));
  }
  auto lab = labels;
  return make_node(std::move(out), {q}, "cross_entropy",
                   [lab, floor](Node& n) {
                     if (!n.inputs[0]->requires_grad) return;
                     const Mat& qv = n.inputs[0]->value;
                     Mat& g = n.inputs[0]->ensure_grad();
                     for (Eigen::Index i = 0; i < qv.rows(); ++i) {
                       int y = lab[i];
                       if (qv(i, y) > floor)
                         g(i, y) += n.grad(i, 0) * (-1.0 / qv(i, y));
                     }
                   });
}

void backward(const NodePtr& root) {
  if (root->value.size() != 1)
    throw std::invalid_argument("backward: root must be scalar (1x1)");
  Mat seed(1, 1);
  seed(0, 0) = 1.0;
  backward_from(root, seed);
}

void backward_from(const NodePtr& node, const Mat& seed) {
  if (seed.rows() != node->value.rows() || seed.cols() != node->value.cols())
    throw std::invalid_argument("backward_from: seed shape mismatch");
  node->ensure_grad() += seed;
  run_backward(node.get());
}

}  // namespace maze
