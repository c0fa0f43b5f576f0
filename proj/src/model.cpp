#include "maze/model.hpp"

#include <cmath>
#include <stdexcept>

namespace maze {

const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Linear: return "linear";
    case LayerKind::Tanh: return "tanh";
    case LayerKind::Relu: return "relu";
    case LayerKind::Softmax: return "softmax";
    case LayerKind::BatchNorm: return "batchnorm";
  }
  throw std::logic_error("unknown layer kind");
}

LayerKind layer_kind_from_name(const std::string& name) {
  if (name == "linear") return LayerKind::Linear;
  if (name == "tanh") return LayerKind::Tanh;
  if (name == "relu") return LayerKind::Relu;
  if (name == "softmax") return LayerKind::Softmax;
  if (name == "batchnorm") return LayerKind::BatchNorm;
  throw std::invalid_argument("unknown layer kind: " + name);
}

Layer Layer::linear(int in, int out, Rng& rng) {
  if (in <= 0 || out <= 0)
    throw std::invalid_argument("linear layer dims must be positive");
  Layer l;
  l.kind = LayerKind::Linear;
  l.in = in;
  l.out = out;
  double bound = 1.0 / std::sqrt(static_cast<double>(in));
  l.W = rand_uniform(rng, in, out, -bound, bound);
  l.b = rand_uniform(rng, 1, out, -bound, bound);
  return l;
}

Layer Layer::activation(LayerKind k) {
  Layer l;
  l.kind = k;
  return l;
}

Layer Layer::batchnorm(int n) {
  Layer l;
  l.kind = LayerKind::BatchNorm;
  l.in = n;
  l.out = n;
  l.gamma = Mat::Ones(1, n);
  l.beta = Mat::Zero(1, n);
  l.run_mean = Mat::Zero(1, n);
  l.run_var = Mat::Ones(1, n);
  return l;
}

namespace {

void check_layer_input(const Layer& l, Eigen::Index cols, size_t idx) {
  if (l.kind == LayerKind::Linear || l.kind == LayerKind::BatchNorm) {
    if (cols != l.in)
      throw std::invalid_argument(
          "layer " + std::to_string(idx) + " (" + layer_kind_name(l.kind) +
          "): expected " + std::to_string(l.in) + " input features, got " +
          std::to_string(cols));
  }
}

Mat softmax_value(const Mat& x) {
  Mat out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::ArrayXd row = x.row(i).array();
    Eigen::ArrayXd e = (row - row.maxCoeff()).exp();
    out.row(i) = (e / e.sum()).matrix();
  }
  return out;
}

struct BnStats {
  Eigen::RowVectorXd mean, var, inv_std;
};

BnStats batch_stats(const Mat& x, double eps) {
  BnStats s;
  s.mean = x.colwise().mean();
  Mat centered = x.rowwise() - s.mean;
  s.var = centered.array().square().colwise().mean();
  s.inv_std = (s.var.array() + eps).rsqrt();
  return s;
}

Mat bn_forward_value(Layer& l, const Mat& x, bool training) {
  if (training) {
    BnStats s = batch_stats(x, l.bn_eps);
    l.run_mean = (1.0 - l.bn_momentum) * l.run_mean.array() +
                 l.bn_momentum * s.mean.array();
    l.run_var = (1.0 - l.bn_momentum) * l.run_var.array() +
                l.bn_momentum * s.var.array();
    Mat xhat = (x.rowwise() - s.mean).array().rowwise() * s.inv_std.array();
    return (xhat.array().rowwise() * l.gamma.row(0).array()).rowwise() +
           l.beta.row(0).array();
  }
  Eigen::RowVectorXd inv_std = (l.run_var.row(0).array() + l.bn_eps).rsqrt();
  Mat xhat = (x.rowwise() - l.run_mean.row(0)).array().rowwise() *
             inv_std.array();
  return (xhat.array().rowwise() * l.gamma.row(0).array()).rowwise() +
         l.beta.row(0).array();
}

// Fused batch-norm graph node. Train mode normalizes with batch statistics
// (running stats updated as a side effect); eval mode is a per-feature affine
// map with the stored statistics.
NodePtr bn_graph_node(Layer& l, const NodePtr& x, const NodePtr& gamma,
                      const NodePtr& beta, bool training) {
  const Mat& xv = x->value;
  if (training) {
    BnStats s = batch_stats(xv, l.bn_eps);
    l.run_mean = (1.0 - l.bn_momentum) * l.run_mean.array() +
                 l.bn_momentum * s.mean.array();
    l.run_var = (1.0 - l.bn_momentum) * l.run_var.array() +
                l.bn_momentum * s.var.array();
    Mat xhat = (xv.rowwise() - s.mean).array().rowwise() * s.inv_std.array();
    Mat out = (xhat.array().rowwise() * gamma->value.row(0).array()).rowwise() +
              beta->value.row(0).array();

    auto n = std::make_shared<Node>();
    n->value = std::move(out);
    n->inputs = {x, gamma, beta};
    n->op = "batchnorm";
    n->requires_grad =
        x->requires_grad || gamma->requires_grad || beta->requires_grad;
    if (!n->requires_grad) return n;
    Eigen::RowVectorXd inv_std = s.inv_std;
    n->backward_fn = [xhat, inv_std](Node& n) {
      const Mat& dy = n.grad;
      auto& xin = n.inputs[0];
      auto& gam = n.inputs[1];
      auto& bet = n.inputs[2];
      if (bet->requires_grad)
        bet->ensure_grad().row(0) += dy.colwise().sum();
      if (gam->requires_grad)
        gam->ensure_grad().row(0) += dy.cwiseProduct(xhat).colwise().sum();
      if (xin->requires_grad) {
        double B = static_cast<double>(dy.rows());
        Mat dxhat = dy.array().rowwise() * gam->value.row(0).array();
        Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum();
        Eigen::RowVectorXd sum_dxhat_xhat =
            dxhat.cwiseProduct(xhat).colwise().sum();
        Mat dx = (B * dxhat.array() -
                  sum_dxhat.replicate(dy.rows(), 1).array() -
                  xhat.array() * sum_dxhat_xhat.replicate(dy.rows(), 1).array())
                     .rowwise() *
                 (inv_std.array() / B);
        xin->accumulate(dx);
      }
    };
    return n;
  }

  // eval mode: y = gamma * (x - mu) * inv_std + beta
  Eigen::RowVectorXd inv_std = (l.run_var.row(0).array() + l.bn_eps).rsqrt();
  Eigen::RowVectorXd mu = l.run_mean.row(0);
  Mat xhat = (xv.rowwise() - mu).array().rowwise() * inv_std.array();
  Mat out = (xhat.array().rowwise() * gamma->value.row(0).array()).rowwise() +
            beta->value.row(0).array();
  auto n = std::make_shared<Node>();
  n->value = std::move(out);
  n->inputs = {x, gamma, beta};
  n->op = "batchnorm_eval";
  n->requires_grad =
      x->requires_grad || gamma->requires_grad || beta->requires_grad;
  if (!n->requires_grad) return n;
  n->backward_fn = [xhat, inv_std](Node& n) {
    const Mat& dy = n.grad;
    auto& xin = n.inputs[0];
    auto& gam = n.inputs[1];
    auto& bet = n.inputs[2];
    if (bet->requires_grad) bet->ensure_grad().row(0) += dy.colwise().sum();
    if (gam->requires_grad)
      gam->ensure_grad().row(0) += dy.cwiseProduct(xhat).colwise().sum();
    if (xin->requires_grad) {
      Mat dx = dy.array().rowwise() *
               (gam->value.row(0).array() * inv_std.array());
      xin->accumulate(dx);
    }
  };
  return n;
}

}  // namespace

int Model::input_dim() const {
  for (const auto& l : layers)
    if (l.kind == LayerKind::Linear || l.kind == LayerKind::BatchNorm)
      return l.in;
  return 0;
}

int Model::output_dim() const {
  for (auto it = layers.rbegin(); it != layers.rend(); ++it)
    if (it->kind == LayerKind::Linear || it->kind == LayerKind::BatchNorm)
      return it->out;
  return 0;
}

Mat Model::forward(const Mat& x) {
  Mat h = x;
  for (size_t i = 0; i < layers.size(); ++i) {
    Layer& l = layers[i];
    check_layer_input(l, h.cols(), i);
    switch (l.kind) {
      case LayerKind::Linear:
        h = (h * l.W).rowwise() + l.b.row(0);
        break;
      case LayerKind::Tanh:
        h = h.array().tanh();
        break;
      case LayerKind::Relu:
        h = h.cwiseMax(0.0);
        break;
      case LayerKind::Softmax:
        h = softmax_value(h);
        break;
      case LayerKind::BatchNorm:
        h = bn_forward_value(l, h, training);
        break;
    }
  }
  require_finite(h, "model output");
  return h;
}

Mat Model::forward_eval(const Mat& x) const {
  Model& self = const_cast<Model&>(*this);
  bool saved = self.training;
  self.training = false;
  Mat out = self.forward(x);
  self.training = saved;
  return out;
}

void Model::for_each_param(
    const std::function<void(const std::string&, Mat&)>& fn) {
  for (size_t i = 0; i < layers.size(); ++i) {
    Layer& l = layers[i];
    std::string p = "l" + std::to_string(i) + ".";
    if (l.kind == LayerKind::Linear) {
      fn(p + "W", l.W);
      fn(p + "b", l.b);
    } else if (l.kind == LayerKind::BatchNorm) {
      fn(p + "gamma", l.gamma);
      fn(p + "beta", l.beta);
    }
  }
}

void Model::for_each_param(
    const std::function<void(const std::string&, const Mat&)>& fn) const {
  const_cast<Model&>(*this).for_each_param(
      [&](const std::string& name, Mat& m) { fn(name, m); });
}

long Model::param_count() const {
  long n = 0;
  for (const auto& l : layers) {
    if (l.kind == LayerKind::Linear) n += l.W.size() + l.b.size();
    if (l.kind == LayerKind::BatchNorm)
      n += l.gamma.size() + l.beta.size() + l.run_mean.size() +
           l.run_var.size();
  }
  return n;
}

Model make_mlp(int in, const std::vector<int>& hidden, int out,
               LayerKind hidden_act, bool use_batchnorm, LayerKind head,
               Rng& rng) {
  Model m;
  int cur = in;
  for (int h : hidden) {
    m.layers.push_back(Layer::linear(cur, h, rng));
    if (use_batchnorm) m.layers.push_back(Layer::batchnorm(h));
    m.layers.push_back(Layer::activation(hidden_act));
    cur = h;
  }
  m.layers.push_back(Layer::linear(cur, out, rng));
  if (head != LayerKind::Linear) m.layers.push_back(Layer::activation(head));
  return m;
}

GraphForward forward_graph(Model& model, const Mat& x, bool track_params,
                           bool input_needs_grad) {
  return forward_graph_on(model, input_needs_grad ? leaf(x) : constant(x),
                          track_params);
}

GraphForward forward_graph_on(Model& model, const NodePtr& input,
                              bool track_params,
                              std::map<std::string, NodePtr>* shared_params) {
  GraphForward gf;
  gf.input = input;
  NodePtr h = gf.input;
  auto param_node = [&](const std::string& name, Mat& value) -> NodePtr {
    if (shared_params) {
      auto it = shared_params->find(name);
      if (it != shared_params->end()) return it->second;
    }
    NodePtr n = track_params ? leaf(value) : constant(value);
    if (shared_params) (*shared_params)[name] = n;
    return n;
  };
  for (size_t i = 0; i < model.layers.size(); ++i) {
    Layer& l = model.layers[i];
    check_layer_input(l, h->value.cols(), i);
    std::string p = "l" + std::to_string(i) + ".";
    switch (l.kind) {
      case LayerKind::Linear: {
        NodePtr W = param_node(p + "W", l.W);
        NodePtr b = param_node(p + "b", l.b);
        gf.params[p + "W"] = W;
        gf.params[p + "b"] = b;
        h = add_rowvec(matmul(h, W), b);
        break;
      }
      case LayerKind::Tanh:
        h = tanh_op(h);
        break;
      case LayerKind::Relu:
        h = relu(h);
        break;
      case LayerKind::Softmax:
        h = softmax_rows(h);
        break;
      case LayerKind::BatchNorm: {
        NodePtr gamma = param_node(p + "gamma", l.gamma);
        NodePtr beta = param_node(p + "beta", l.beta);
        gf.params[p + "gamma"] = gamma;
        gf.params[p + "beta"] = beta;
        h = bn_graph_node(l, h, gamma, beta, model.training);
        break;
      }
    }
    gf.activations.push_back(h);
  }
  return gf;
}

GradMap collect_grads(const std::map<std::string, NodePtr>& params) {
  GradMap grads;
  for (const auto& [name, node] : params) {
    grads[name] = node->grad.size() != 0
                      ? node->grad
                      : Mat::Zero(node->value.rows(), node->value.cols());
  }
  return grads;
}

GradMap collect_grads(const GraphForward& gf) { return collect_grads(gf.params); }

}  // namespace maze
