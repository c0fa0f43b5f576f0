#include "maze/maze_pd.hpp"

#include <fstream>
#include <sstream>

#include "maze/losses.hpp"

namespace maze {

namespace {

// Builds grad_x D(x) as forward graph nodes, reusing the activation and
// parameter nodes of `gf`. A single backward pass over anything derived from
// the result therefore differentiates through the gradient itself, which is
// what the penalty term needs.
NodePtr input_gradient_graph(const Model& critic, const GraphForward& gf) {
  if (critic.output_dim() != 1)
    throw std::invalid_argument("critic must have a scalar output");
  NodePtr r = constant(Mat::Ones(gf.output()->value.rows(), 1));
  for (long i = static_cast<long>(critic.layers.size()) - 1; i >= 0; --i) {
    const Layer& l = critic.layers[i];
    std::string p = "l" + std::to_string(i) + ".";
    switch (l.kind) {
      case LayerKind::Linear:
        r = matmul_nt(r, gf.params.at(p + "W"));
        break;
      case LayerKind::Tanh:
        r = mul(r, one_minus_square(gf.activations[i]));
        break;
      case LayerKind::Relu: {
        NodePtr pre = i == 0 ? gf.input : gf.activations[i - 1];
        r = mul(r, relu_mask(pre));
        break;
      }
      default:
        throw std::invalid_argument(
            "critic supports linear/tanh/relu layers only");
    }
  }
  return r;
}

NodePtr penalty_node(const Model& critic, const GraphForward& gf_hat) {
  NodePtr grad_x = input_gradient_graph(critic, gf_hat);
  NodePtr norms = sqrt_guarded(row_sum(square(grad_x)));
  return mean_all(square(sub_scalar(norms, 1.0)));
}

}  // namespace

double critic_loss_backward(Model& critic, const Mat& x_real, const Mat& x_fake,
                            double gp_weight, Rng& alpha_rng, GradMap* grads) {
  if (x_real.rows() == 0)
    throw std::invalid_argument("critic_loss: empty real batch (seed data required)");
  if (x_real.rows() != x_fake.rows() || x_real.cols() != x_fake.cols())
    throw std::invalid_argument("critic_loss: real/fake batch shapes differ");

  const bool track = grads != nullptr;
  std::map<std::string, NodePtr> shared;
  auto gf_fake = forward_graph_on(critic, constant(x_fake), track, &shared);
  auto gf_real = forward_graph_on(critic, constant(x_real), track, &shared);

  Mat alpha = rand_uniform(alpha_rng, x_real.rows(), 1, 0.0, 1.0);
  Mat x_hat = alpha.replicate(1, x_real.cols()).cwiseProduct(x_real) +
              (1.0 - alpha.array()).matrix().replicate(1, x_real.cols())
                  .cwiseProduct(x_fake);
  auto gf_hat = forward_graph_on(critic, constant(x_hat), track, &shared);

  NodePtr loss = add(sub(mean_all(gf_fake.output()), mean_all(gf_real.output())),
                     scale(penalty_node(critic, gf_hat), gp_weight));
  if (track) {
    backward(loss);
    *grads = collect_grads(shared);
  }
  return loss->value(0, 0);
}

double gradient_penalty(Model& critic, const Mat& x_hat, double gp_weight) {
  auto gf = forward_graph_on(critic, constant(x_hat), false);
  return gp_weight * penalty_node(critic, gf)->value(0, 0);
}

Mat critic_input_gradient(Model& critic, const Mat& x) {
  auto gf = forward_graph_on(critic, constant(x), false);
  return input_gradient_graph(critic, gf)->value;
}

Vec generator_loss_pd(const Mat& y_t, const Mat& y_c, Model& critic,
                      const Mat& x, double lambda) {
  Vec loss = -kl_rows_value(y_t, y_c);
  if (lambda != 0.0) {
    Mat d = critic.forward_eval(x);
    loss -= lambda * d.col(0);
  }
  return loss;
}

SeedSet load_seeds_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open seed csv: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("seed csv: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("seed csv: no rows in " + path);
  SeedSet set;
  set.inputs = Mat(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) set.inputs(i, j) = rows[i][j];
  return set;
}

SeedSet load_seeds_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open seed file: " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("seed file: empty");
  std::istringstream ss(line);
  std::string magic, version;
  long n = 0, d = 0;
  ss >> magic >> version >> n >> d;
  if (magic != "maze-seeds" || version != "v1" || n <= 0 || d <= 0)
    throw std::runtime_error("seed file: bad header in " + path);
  SeedSet set;
  set.inputs = Mat(n, d);
  is.read(reinterpret_cast<char*>(set.inputs.data()),
          static_cast<std::streamsize>(n * d * sizeof(double)));
  if (!is) throw std::runtime_error("seed file: truncated blob in " + path);
  return set;
}

void save_seeds_tensor(const std::string& path, const SeedSet& seeds) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write seed file: " + path);
  os << "maze-seeds v1 " << seeds.inputs.rows() << " " << seeds.inputs.cols()
     << "\n";
  os.write(reinterpret_cast<const char*>(seeds.inputs.data()),
           static_cast<std::streamsize>(seeds.inputs.size() * sizeof(double)));
}

AttackResult run_maze_pd(Oracle& oracle, const SeedSet& seeds,
                         const AttackConfig& cfg, const PdConfig& pd,
                         const EvalContext& eval) {
  MazeAttack attack(oracle, cfg, &eval);
  attack.enable_pd(seeds, pd);
  return attack.run();
}

}  // namespace maze
