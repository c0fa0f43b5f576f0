#include "maze/bench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace maze {

const char* data_kind_name(DataKind k) {
  switch (k) {
    case DataKind::Blobs: return "blobs";
    case DataKind::Rings: return "rings";
    case DataKind::Grid: return "grid";
  }
  throw std::logic_error("unknown data kind");
}

DataKind data_kind_from_name(const std::string& name) {
  if (name == "blobs") return DataKind::Blobs;
  if (name == "rings") return DataKind::Rings;
  if (name == "grid") return DataKind::Grid;
  throw std::invalid_argument("unknown dataset kind: " + name);
}

namespace {

std::vector<int> class_counts(int n, int k) {
  std::vector<int> counts(k, n / k);
  for (int c = 0; c < n % k; ++c) ++counts[c];  // balanced within 1
  return counts;
}

Mat place_blob_centers(const DatasetSpec& spec, Rng& rng) {
  const double min_dist = spec.sep * spec.noise * std::sqrt(spec.d);
  const int n_centers = spec.classes * std::max(spec.modes_per_class, 1);
  Mat centers(n_centers, spec.d);
  for (int c = 0; c < n_centers; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      Mat cand = rand_uniform(rng, 1, spec.d, -spec.center_box, spec.center_box);
      placed = true;
      for (int prev = 0; prev < c; ++prev) {
        if ((cand.row(0) - centers.row(prev)).norm() < min_dist) {
          placed = false;
          break;
        }
      }
      if (placed) centers.row(c) = cand.row(0);
    }
    if (!placed)
      throw std::invalid_argument(
          "make_dataset: cannot place " + std::to_string(spec.classes) +
          " separated clusters in this dimension");
  }
  if (spec.shift != 0.0) centers.array() += spec.shift;
  return centers;
}

void fill_blobs(const DatasetSpec& spec, const Mat& centers, Rng& rng, int n,
                Mat& x, std::vector<int>& y) {
  // center j carries class j % classes, so multi-modal classes interleave
  auto counts = class_counts(n, static_cast<int>(centers.rows()));
  long row = 0;
  for (int c = 0; c < centers.rows(); ++c) {
    for (int i = 0; i < counts[c]; ++i, ++row) {
      x.row(row) = centers.row(c) + spec.noise * randn(rng, 1, spec.d).row(0);
      y[row] = c % spec.classes;
    }
  }
}

void fill_rings(const DatasetSpec& spec, Rng& rng, int n, Mat& x,
                std::vector<int>& y) {
  if (spec.d < 2)
    throw std::invalid_argument("rings dataset needs d >= 2");
  const double r_lo = 0.2, r_hi = 0.85;
  const double gap = spec.classes > 1
                         ? (r_hi - r_lo) / (spec.classes - 1)
                         : r_hi - r_lo;
  if (spec.classes > 1 && gap < 3.0 * spec.noise)
    throw std::invalid_argument(
        "rings dataset cannot represent " + std::to_string(spec.classes) +
        " classes at this noise level");
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::normal_distribution<double> radial(0.0, spec.noise);
  auto counts = class_counts(n, spec.classes);
  long row = 0;
  for (int c = 0; c < spec.classes; ++c) {
    double rc = spec.classes > 1 ? r_lo + gap * c : 0.5 * (r_lo + r_hi);
    for (int i = 0; i < counts[c]; ++i, ++row) {
      double th = angle(rng);
      double r = rc + radial(rng);
      x.row(row).setZero();
      x(row, 0) = r * std::cos(th) + spec.shift;
      x(row, 1) = r * std::sin(th) + spec.shift;
      if (spec.d > 2)
        x.block(row, 2, 1, spec.d - 2) =
            0.5 * spec.noise * randn(rng, 1, spec.d - 2);
      y[row] = c;
    }
  }
}

void fill_grid(const DatasetSpec& spec, Rng& rng, int n, Mat& x,
               std::vector<int>& y) {
  if (spec.d < 2)
    throw std::invalid_argument("grid dataset needs d >= 2");
  int g = static_cast<int>(std::ceil(std::sqrt(spec.classes)));
  if (g < 2) g = 2;
  const double span = 1.6;  // cells tile [-0.8, 0.8]^2
  const double cell = span / g;
  if (spec.noise * 3.0 > cell * 0.5)
    throw std::invalid_argument("grid dataset: noise too large for cell size");
  // cell (i,j) belongs to class (i + j) % classes: neighbouring cells always
  // differ, forcing a non-linear boundary.
  std::vector<std::vector<std::pair<int, int>>> cells_of(spec.classes);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j)
      cells_of[(i + j) % spec.classes].emplace_back(i, j);
  for (int c = 0; c < spec.classes; ++c)
    if (cells_of[c].empty())
      throw std::invalid_argument(
          "grid dataset cannot represent this many classes");
  auto counts = class_counts(n, spec.classes);
  long row = 0;
  for (int c = 0; c < spec.classes; ++c) {
    std::uniform_int_distribution<size_t> pick(0, cells_of[c].size() - 1);
    for (int i = 0; i < counts[c]; ++i, ++row) {
      auto [ci, cj] = cells_of[c][pick(rng)];
      double cx = -0.8 + cell * (ci + 0.5);
      double cy = -0.8 + cell * (cj + 0.5);
      x.row(row).setZero();
      x(row, 0) = cx + spec.noise * randn(rng, 1, 1)(0, 0) + spec.shift;
      x(row, 1) = cy + spec.noise * randn(rng, 1, 1)(0, 0) + spec.shift;
      if (spec.d > 2)
        x.block(row, 2, 1, spec.d - 2) =
            0.5 * spec.noise * randn(rng, 1, spec.d - 2);
      y[row] = c;
    }
  }
}

void shuffle_rows(Mat& x, std::vector<int>& y, Rng& rng) {
  std::vector<long> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Mat xs(x.rows(), x.cols());
  std::vector<int> ys(y.size());
  for (long i = 0; i < x.rows(); ++i) {
    xs.row(i) = x.row(order[i]);
    ys[i] = y[order[i]];
  }
  x = std::move(xs);
  y = std::move(ys);
}

}  // namespace

Dataset make_dataset(const DatasetSpec& spec) {
  if (spec.classes < 2) throw std::invalid_argument("make_dataset: classes >= 2");
  if (spec.n_train < spec.classes || spec.n_test < spec.classes)
    throw std::invalid_argument("make_dataset: need at least one sample per class");
  if (spec.d < 1) throw std::invalid_argument("make_dataset: d >= 1");

  Rng rng(derive_seed(spec.seed, 1000));
  Dataset ds;
  ds.classes = spec.classes;
  ds.x_train = Mat(spec.n_train, spec.d);
  ds.y_train.resize(spec.n_train);
  ds.x_test = Mat(spec.n_test, spec.d);
  ds.y_test.resize(spec.n_test);

  switch (spec.kind) {
    case DataKind::Blobs: {
      Mat centers = place_blob_centers(spec, rng);
      fill_blobs(spec, centers, rng, spec.n_train, ds.x_train, ds.y_train);
      fill_blobs(spec, centers, rng, spec.n_test, ds.x_test, ds.y_test);
      break;
    }
    case DataKind::Rings:
      fill_rings(spec, rng, spec.n_train, ds.x_train, ds.y_train);
      fill_rings(spec, rng, spec.n_test, ds.x_test, ds.y_test);
      break;
    case DataKind::Grid:
      fill_grid(spec, rng, spec.n_train, ds.x_train, ds.y_train);
      fill_grid(spec, rng, spec.n_test, ds.x_test, ds.y_test);
      break;
  }
  ds.x_train = ds.x_train.cwiseMax(-1.0).cwiseMin(1.0);
  ds.x_test = ds.x_test.cwiseMax(-1.0).cwiseMin(1.0);
  shuffle_rows(ds.x_train, ds.y_train, rng);
  shuffle_rows(ds.x_test, ds.y_test, rng);
  return ds;
}

std::string dataset_id(const DatasetSpec& spec) {
  std::ostringstream ss;
  ss << data_kind_name(spec.kind) << "-d" << spec.d << "-k" << spec.classes
     << "-n" << spec.n_train << "-s" << spec.seed;
  if (spec.modes_per_class > 1) ss << "-m" << spec.modes_per_class;
  if (spec.shift != 0.0) ss << "-shift" << spec.shift;
  return ss.str();
}

}  // namespace maze
