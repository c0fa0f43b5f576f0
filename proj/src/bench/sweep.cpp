#include "maze/bench/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "maze/bench/metrics.hpp"

namespace maze {

namespace {

SeedSet pick_seed_set(const Dataset& data, int n_seeds, std::uint64_t data_seed) {
  if (n_seeds <= 0 || n_seeds > data.x_train.rows())
    throw std::invalid_argument("seed set size out of range");
  Rng rng(derive_seed(data_seed, 2000));
  std::vector<long> order(data.x_train.rows());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  SeedSet set;
  set.inputs = Mat(n_seeds, data.x_train.cols());
  for (int i = 0; i < n_seeds; ++i) set.inputs.row(i) = data.x_train.row(order[i]);
  return set;
}

Mat surrogate_inputs_for(const RunConfig& cfg) {
  DatasetSpec spec = cfg.data;
  spec.kind = data_kind_from_name(cfg.surrogate_kind);
  spec.shift = cfg.surrogate_shift;
  spec.seed = derive_seed(cfg.data.seed, 3000);
  spec.n_train = static_cast<int>(cfg.surrogate_n);
  spec.n_test = std::max(2 * spec.classes, 8);
  return make_dataset(spec).x_train;
}

void apply_axis(RunConfig& cfg, const std::string& axis,
                const std::string& value) {
  if (axis == "Q") {
    cfg.apply("budget", value);
  } else if (axis == "m") {
    cfg.apply("m", value);
  } else if (axis == "replay") {
    if (value == "on")
      cfg.atk.n_r = cfg.atk.n_r > 0 ? cfg.atk.n_r : 10;
    else if (value == "off")
      cfg.atk.n_r = 0;
    else
      cfg.apply("NR", value);
  } else if (axis == "attack") {
    cfg.apply("attack", value);
  } else {
    throw std::invalid_argument("unknown sweep axis '" + axis + "'");
  }
}

}  // namespace

AttackResult dispatch_attack(const RunConfig& cfg, Oracle& oracle,
                             const Model& target, const Dataset& data,
                             const EvalContext& eval) {
  if (cfg.attack == "maze") return run_maze(oracle, cfg.atk, eval);
  if (cfg.attack == "maze-wb") return run_maze_whitebox(target, cfg.atk, eval);
  if (cfg.attack == "maze-pd") {
    SeedSet seeds = cfg.seeds_file.empty()
                        ? pick_seed_set(data, cfg.n_seeds, cfg.data.seed)
                        : (cfg.seeds_file.ends_with(".csv")
                               ? load_seeds_csv(cfg.seeds_file)
                               : load_seeds_tensor(cfg.seeds_file));
    return run_maze_pd(oracle, seeds, cfg.atk, cfg.pd, eval);
  }
  if (cfg.attack == "noise") return run_noise(oracle, cfg.atk, eval);
  if (cfg.attack == "jbda") {
    SeedSet seeds = cfg.seeds_file.empty()
                        ? pick_seed_set(data, cfg.n_seeds, cfg.data.seed)
                        : (cfg.seeds_file.ends_with(".csv")
                               ? load_seeds_csv(cfg.seeds_file)
                               : load_seeds_tensor(cfg.seeds_file));
    JbdaConfig jb = cfg.jbda;
    jb.n_seeds = static_cast<int>(seeds.size());
    return run_jbda(oracle, seeds, jb, cfg.atk, eval);
  }
  if (cfg.attack == "surrogate")
    return run_surrogate(oracle, surrogate_inputs_for(cfg), cfg.surrogate,
                         cfg.atk, eval);
  throw std::invalid_argument("unknown attack '" + cfg.attack + "'");
}

const char* Report::csv_header() {
  return "attack,axis,value,config_hash,seed,final_q,clone_acc,norm_acc,wall_s,status";
}

void Report::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write report: " + path);
  os << csv_header() << "\n";
  os.precision(10);
  for (const auto& r : rows) {
    os << r.attack << "," << r.axis << "," << r.value << "," << r.config_hash
       << "," << r.seed << "," << r.final_q << "," << r.clone_acc << ","
       << r.norm_acc << "," << r.wall_s << "," << r.status << "\n";
  }
}

std::vector<std::pair<std::string, double>> Report::median_by_value() const {
  std::vector<std::string> seen;
  std::vector<std::pair<std::string, double>> out;
  for (const auto& r : rows) {
    std::string key = r.attack + "/" + r.value;
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    std::vector<double> accs;
    for (const auto& s : rows)
      if (s.attack == r.attack && s.value == r.value && s.status == "ok")
        accs.push_back(s.norm_acc);
    out.emplace_back(key, accs.empty() ? 0.0 : median(accs));
  }
  return out;
}

std::string Report::summary_table() const {
  std::ostringstream os;
  os << std::left << std::setw(24) << "attack/value" << std::right
     << std::setw(12) << "runs" << std::setw(16) << "median_norm" << "\n";
  for (const auto& [key, med] : median_by_value()) {
    long n = 0;
    for (const auto& r : rows)
      if (r.attack + "/" + r.value == key && r.status == "ok") ++n;
    os << std::left << std::setw(24) << key << std::right << std::setw(12) << n
       << std::setw(16) << std::fixed << std::setprecision(4) << med << "\n";
  }
  return os.str();
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty");
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Report run_sweep(const SweepSpec& spec) {
  if (spec.values.empty())
    throw std::invalid_argument("run_sweep: values must be non-empty");
  if (spec.repeats < 1)
    throw std::invalid_argument("run_sweep: repeats must be >= 1");

  Dataset data = make_dataset(spec.base.data);
  TrainedTarget target = train_target(spec.base.target, data,
                                      spec.base.target_seed);
  EvalContext eval{data.x_test, data.y_test, target.test_accuracy};

  Report report;
  report.target_accuracy = target.test_accuracy;
  if (!spec.out_dir.empty())
    std::filesystem::create_directories(spec.out_dir);

  for (const auto& value : spec.values) {
    for (int rep = 0; rep < spec.repeats; ++rep) {
      RunConfig cfg = spec.base;
      apply_axis(cfg, spec.axis, value);
      cfg.atk.seed = derive_seed(spec.base.atk.seed, 7000 + rep);
      ReportRow row;
      row.attack = cfg.attack;
      row.axis = spec.axis;
      row.value = value;
      row.seed = cfg.atk.seed;
      {
        std::ostringstream h;
        h << std::hex << cfg.hash();
        row.config_hash = h.str();
      }
      auto t0 = std::chrono::steady_clock::now();
      try {
        BlackBoxOracle oracle(target.model, cfg.atk.budget);
        AttackResult result = dispatch_attack(cfg, oracle, target.model, data, eval);
        row.final_q = result.log.rows.empty() ? 0 : result.log.rows.back().q;
        row.clone_acc = model_accuracy(result.clone, data.x_test, data.y_test);
        row.norm_acc = normalized_accuracy(row.clone_acc, target.test_accuracy);
        if (!spec.out_dir.empty()) {
          std::string stem = spec.out_dir + "/" + cfg.attack + "-" + spec.axis +
                             "-" + value + "-r" + std::to_string(rep);
          result.log.write_csv(stem + ".csv");
        }
      } catch (const std::exception& e) {
        row.status = std::string("failed");
      }
      row.wall_s = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
      // Merge order is deterministic: values then repeats.
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace maze
