#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "maze/autograd.hpp"
#include "maze/common.hpp"

namespace maze {

enum class LayerKind { Linear, Tanh, Relu, Softmax, BatchNorm };

const char* layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

struct Layer {
  LayerKind kind;
  int in = 0;   // feature count entering the layer (activations: passthrough)
  int out = 0;

  // Linear
  Mat W;  // (in x out)
  Mat b;  // (1 x out)

  // BatchNorm
  Mat gamma, beta;          // (1 x n)
  Mat run_mean, run_var;    // (1 x n), tracked in train mode
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;

  static Layer linear(int in, int out, Rng& rng);
  static Layer activation(LayerKind k);
  static Layer batchnorm(int n);
};

using GradMap = std::map<std::string, Mat>;

// Ordered stack of layers with named parameters. Parameter order (and the
// checkpoint blob order) is declaration order: per layer W,b or
// gamma,beta,run_mean,run_var.
struct Model {
  std::vector<Layer> layers;
  bool training = true;

  int input_dim() const;
  int output_dim() const;

  /// Plain forward pass. In train mode batch-norm layers update their
  /// running statistics as a side effect.
  Mat forward(const Mat& x);
  /// Forward with mode forced to eval, no side effects.
  Mat forward_eval(const Mat& x) const;

  void for_each_param(const std::function<void(const std::string&, Mat&)>& fn);
  void for_each_param(
      const std::function<void(const std::string&, const Mat&)>& fn) const;
  long param_count() const;  // includes batch-norm running stats
};

/// MLP factory. `head` is appended after the last linear layer; pass
/// LayerKind::Linear for a bare linear head.
Model make_mlp(int in, const std::vector<int>& hidden, int out,
               LayerKind hidden_act, bool use_batchnorm, LayerKind head,
               Rng& rng);

struct GraphForward {
  NodePtr input;
  std::vector<NodePtr> activations;  // one per layer, last is the output
  std::map<std::string, NodePtr> params;  // leaves when tracked, else constants
  NodePtr output() const { return activations.empty() ? input : activations.back(); }
  /// Node feeding the final activation layer (the pre-head activation).
  NodePtr pre_head() const {
    return activations.size() >= 2 ? activations[activations.size() - 2]
                                   : input;
  }
};

/// Builds the autodiff graph for a forward pass. With `track_params` the
/// parameters become gradient leaves; with `input_needs_grad` the input does.
GraphForward forward_graph(Model& model, const Mat& x, bool track_params = true,
                           bool input_needs_grad = false);

/// Forward on an existing node, composing models within one graph. When
/// `shared_params` is given, parameter nodes are created on first use and
/// reused afterwards, so several forwards of the same model accumulate into
/// one set of gradient leaves.
GraphForward forward_graph_on(Model& model, const NodePtr& input,
                              bool track_params = true,
                              std::map<std::string, NodePtr>* shared_params = nullptr);

/// Reads parameter gradients out of a tracked forward after backward().
GradMap collect_grads(const GraphForward& gf);
GradMap collect_grads(const std::map<std::string, NodePtr>& params);

}  // namespace maze
