#include "maze/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace maze {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blob layout assumes a little-endian host");

namespace {

void write_blob(std::ostream& os, const Mat& m) {
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(m.size() * sizeof(double)));
}

void read_blob(std::istream& is, Mat& m) {
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!is) throw std::runtime_error("checkpoint: truncated parameter blob");
}

// Blob order must match for_each_param plus running stats; keep the two
// functions in sync.
template <typename Fn>
void for_each_blob_tensor(Model& model, Fn&& fn) {
  for (auto& l : model.layers) {
    if (l.kind == LayerKind::Linear) {
      fn(l.W);
      fn(l.b);
    } else if (l.kind == LayerKind::BatchNorm) {
      fn(l.gamma);
      fn(l.beta);
      fn(l.run_mean);
      fn(l.run_var);
    }
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model,
                     std::uint64_t seed) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open checkpoint for write: " + path);
  os << "maze-checkpoint v1\n";
  os << "dtype f64\n";
  os << "seed " << seed << "\n";
  os << "layers " << model.layers.size() << "\n";
  for (size_t i = 0; i < model.layers.size(); ++i) {
    const Layer& l = model.layers[i];
    os << "layer " << i << " " << layer_kind_name(l.kind);
    if (l.kind == LayerKind::Linear || l.kind == LayerKind::BatchNorm)
      os << " " << l.in << " " << l.out;
    os << "\n";
  }
  os << "params " << model.param_count() << "\n";
  os << "blob\n";
  for_each_blob_tensor(const_cast<Model&>(model),
                       [&](const Mat& m) { write_blob(os, m); });
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string line;
  auto next_line = [&]() -> std::string& {
    if (!std::getline(is, line))
      throw std::runtime_error("checkpoint: truncated header");
    return line;
  };
  if (next_line() != "maze-checkpoint v1")
    throw std::runtime_error("checkpoint: bad magic");
  if (next_line() != "dtype f64")
    throw std::runtime_error("checkpoint: unsupported dtype");

  LoadedCheckpoint out;
  {
    std::istringstream ss(next_line());
    std::string key;
    ss >> key >> out.seed;
    if (key != "seed") throw std::runtime_error("checkpoint: expected seed");
  }
  size_t n_layers = 0;
  {
    std::istringstream ss(next_line());
    std::string key;
    ss >> key >> n_layers;
    if (key != "layers")
      throw std::runtime_error("checkpoint: expected layer count");
  }
  Model& model = out.model;
  for (size_t i = 0; i < n_layers; ++i) {
    std::istringstream ss(next_line());
    std::string key, kind_name;
    size_t idx;
    ss >> key >> idx >> kind_name;
    if (key != "layer" || idx != i)
      throw std::runtime_error("checkpoint: malformed layer line");
    LayerKind kind = layer_kind_from_name(kind_name);
    if (kind == LayerKind::Linear || kind == LayerKind::BatchNorm) {
      int in = 0, outdim = 0;
      ss >> in >> outdim;
      if (!ss) throw std::runtime_error("checkpoint: missing layer dims");
      if (kind == LayerKind::Linear) {
        Layer l;
        l.kind = kind;
        l.in = in;
        l.out = outdim;
        l.W = Mat::Zero(in, outdim);
        l.b = Mat::Zero(1, outdim);
        model.layers.push_back(std::move(l));
      } else {
        model.layers.push_back(Layer::batchnorm(in));
      }
    } else {
      model.layers.push_back(Layer::activation(kind));
    }
  }
  long declared = 0;
  {
    std::istringstream ss(next_line());
    std::string key;
    ss >> key >> declared;
    if (key != "params")
      throw std::runtime_error("checkpoint: expected param count");
  }
  if (next_line() != "blob")
    throw std::runtime_error("checkpoint: expected blob marker");
  if (declared != model.param_count())
    throw std::runtime_error("checkpoint: parameter count mismatch");
  for_each_blob_tensor(model, [&](Mat& m) { read_blob(is, m); });
  model.training = false;
  return out;
}

}  // namespace maze
