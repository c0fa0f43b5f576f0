#include "maze/bench/run_config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace maze {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

long to_long(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long out = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (...) {
    throw std::invalid_argument("config key '" + key + "': expected integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (...) {
    throw std::invalid_argument("config key '" + key + "': expected number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw std::invalid_argument("config key '" + key + "': expected boolean, got '" + v + "'");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::istringstream ss(v);
  std::string cell;
  while (std::getline(ss, cell, ':'))
    out.push_back(static_cast<int>(to_long(key, trim(cell))));
  if (out.empty())
    throw std::invalid_argument("config key '" + key + "': empty list");
  return out;
}

std::string int_list_str(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i)
    s += (i ? ":" : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected 'key = value'");
    cfg.apply(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

void RunConfig::apply(const std::string& key, const std::string& v) {
  if (key == "attack") {
    if (v != "maze" && v != "maze-pd" && v != "maze-wb" && v != "noise" &&
        v != "jbda" && v != "surrogate")
      throw std::invalid_argument("config key 'attack': unknown attack '" + v + "'");
    attack = v;
  } else if (key == "budget") atk.budget = to_long(key, v);
  else if (key == "eps") atk.epsilon = to_double(key, v);
  else if (key == "m") atk.m = static_cast<int>(to_long(key, v));
  else if (key == "B") atk.batch = static_cast<int>(to_long(key, v));
  else if (key == "NG") atk.n_g = static_cast<int>(to_long(key, v));
  else if (key == "NC") atk.n_c = static_cast<int>(to_long(key, v));
  else if (key == "NR") atk.n_r = static_cast<int>(to_long(key, v));
  else if (key == "etaG") atk.eta_g = to_double(key, v);
  else if (key == "etaC") atk.eta_c = to_double(key, v);
  else if (key == "momentum") atk.clone_momentum = to_double(key, v);
  else if (key == "latent") atk.latent_dim = static_cast<int>(to_long(key, v));
  else if (key == "seed") atk.seed = static_cast<std::uint64_t>(to_long(key, v));
  else if (key == "cadence") atk.checkpoint_every = static_cast<int>(to_long(key, v));
  else if (key == "replay_cap") atk.replay_cap = to_long(key, v);
  else if (key == "gen_hidden") atk.gen_hidden = to_int_list(key, v);
  else if (key == "gen_batchnorm") atk.gen_batchnorm = to_bool(key, v);
  else if (key == "gen_out_gain") atk.gen_out_gain = to_double(key, v);
  else if (key == "clone_hidden") atk.clone_hidden = to_int_list(key, v);
  else if (key == "clone_tanh") atk.clone_tanh = to_bool(key, v);
  else if (key == "gen_tanh_hidden") atk.gen_tanh_hidden = to_bool(key, v);
  else if (key == "pd.lambda") pd.lambda = to_double(key, v);
  else if (key == "pd.Nd") pd.n_d = static_cast<int>(to_long(key, v));
  else if (key == "pd.etaD") pd.eta_d = to_double(key, v);
  else if (key == "pd.gp") pd.gp_weight = to_double(key, v);
  else if (key == "pd.critic_hidden") pd.critic_hidden = to_int_list(key, v);
  else if (key == "pd.exact_critic_grad") pd.exact_critic_grad = to_bool(key, v);
  else if (key == "jbda.rounds") jbda.rounds = static_cast<int>(to_long(key, v));
  else if (key == "jbda.epochs") jbda.epochs_per_round = static_cast<int>(to_long(key, v));
  else if (key == "jbda.lambda") jbda.lambda = to_double(key, v);
  else if (key == "jbda.lr") jbda.lr = to_double(key, v);
  else if (key == "surrogate.epochs") surrogate.epochs = static_cast<int>(to_long(key, v));
  else if (key == "surrogate.lr") surrogate.lr = to_double(key, v);
  else if (key == "surrogate.kind") surrogate_kind = v;
  else if (key == "surrogate.shift") surrogate_shift = to_double(key, v);
  else if (key == "surrogate.n") surrogate_n = to_long(key, v);
  else if (key == "dataset.kind") data.kind = data_kind_from_name(v);
  else if (key == "dataset.d") data.d = static_cast<int>(to_long(key, v));
  else if (key == "dataset.K") data.classes = static_cast<int>(to_long(key, v));
  else if (key == "dataset.ntrain") data.n_train = static_cast<int>(to_long(key, v));
  else if (key == "dataset.ntest") data.n_test = static_cast<int>(to_long(key, v));
  else if (key == "dataset.seed") data.seed = static_cast<std::uint64_t>(to_long(key, v));
  else if (key == "dataset.noise") data.noise = to_double(key, v);
  else if (key == "dataset.sep") data.sep = to_double(key, v);
  else if (key == "dataset.shift") data.shift = to_double(key, v);
  else if (key == "dataset.modes") data.modes_per_class = static_cast<int>(to_long(key, v));
  else if (key == "dataset.box") data.center_box = to_double(key, v);
  else if (key == "target.tanh") target.tanh_hidden = to_bool(key, v);
  else if (key == "target.background") target.background_mix = to_double(key, v);
  else if (key == "target.background_label") target.background_label = static_cast<int>(to_long(key, v));
  else if (key == "target.epochs") target.epochs = static_cast<int>(to_long(key, v));
  else if (key == "target.lr") target.lr = to_double(key, v);
  else if (key == "target.hidden") target.hidden = to_int_list(key, v);
  else if (key == "target.floor") target.accuracy_floor = to_double(key, v);
  else if (key == "target.seed") target_seed = static_cast<std::uint64_t>(to_long(key, v));
  else if (key == "n_seeds") n_seeds = static_cast<int>(to_long(key, v));
  else if (key == "seeds_file") seeds_file = v;
  else if (key == "out") out_dir = v;
  else
    throw std::invalid_argument("unknown config key '" + key + "'");
}

std::string RunConfig::echo() const {
  std::ostringstream os;
  os.precision(17);
  os << "attack = " << attack << "\n";
  os << "B = " << atk.batch << "\n";
  os << "NC = " << atk.n_c << "\n";
  os << "NG = " << atk.n_g << "\n";
  os << "NR = " << atk.n_r << "\n";
  os << "budget = " << atk.budget << "\n";
  os << "cadence = " << atk.checkpoint_every << "\n";
  os << "clone_hidden = " << int_list_str(atk.clone_hidden) << "\n";
  os << "clone_tanh = " << (atk.clone_tanh ? "true" : "false") << "\n";
  os << "dataset.K = " << data.classes << "\n";
  os << "dataset.d = " << data.d << "\n";
  os << "dataset.kind = " << data_kind_name(data.kind) << "\n";
  os << "dataset.noise = " << data.noise << "\n";
  os << "dataset.ntest = " << data.n_test << "\n";
  os << "dataset.ntrain = " << data.n_train << "\n";
  os << "dataset.seed = " << data.seed << "\n";
  os << "dataset.sep = " << data.sep << "\n";
  os << "dataset.shift = " << data.shift << "\n";
  os << "dataset.modes = " << data.modes_per_class << "\n";
  os << "dataset.box = " << data.center_box << "\n";
  os << "eps = " << atk.epsilon << "\n";
  os << "etaC = " << atk.eta_c << "\n";
  os << "etaG = " << atk.eta_g << "\n";
  os << "gen_batchnorm = " << (atk.gen_batchnorm ? "true" : "false") << "\n";
  os << "gen_out_gain = " << atk.gen_out_gain << "\n";
  os << "gen_hidden = " << int_list_str(atk.gen_hidden) << "\n";
  os << "gen_tanh_hidden = " << (atk.gen_tanh_hidden ? "true" : "false") << "\n";
  os << "jbda.epochs = " << jbda.epochs_per_round << "\n";
  os << "jbda.lambda = " << jbda.lambda << "\n";
  os << "jbda.lr = " << jbda.lr << "\n";
  os << "jbda.rounds = " << jbda.rounds << "\n";
  os << "latent = " << atk.latent_dim << "\n";
  os << "m = " << atk.m << "\n";
  os << "momentum = " << atk.clone_momentum << "\n";
  os << "n_seeds = " << n_seeds << "\n";
  os << "pd.Nd = " << pd.n_d << "\n";
  os << "pd.critic_hidden = " << int_list_str(pd.critic_hidden) << "\n";
  os << "pd.etaD = " << pd.eta_d << "\n";
  os << "pd.exact_critic_grad = " << (pd.exact_critic_grad ? "true" : "false") << "\n";
  os << "pd.gp = " << pd.gp_weight << "\n";
  os << "pd.lambda = " << pd.lambda << "\n";
  os << "replay_cap = " << atk.replay_cap << "\n";
  os << "seed = " << atk.seed << "\n";
  if (!seeds_file.empty()) os << "seeds_file = " << seeds_file << "\n";
  os << "surrogate.epochs = " << surrogate.epochs << "\n";
  os << "surrogate.kind = " << surrogate_kind << "\n";
  os << "surrogate.lr = " << surrogate.lr << "\n";
  os << "surrogate.n = " << surrogate_n << "\n";
  os << "surrogate.shift = " << surrogate_shift << "\n";
  os << "target.background = " << target.background_mix << "\n";
  os << "target.background_label = " << target.background_label << "\n";
  os << "target.epochs = " << target.epochs << "\n";
  os << "target.tanh = " << (target.tanh_hidden ? "true" : "false") << "\n";
  os << "target.floor = " << target.accuracy_floor << "\n";
  os << "target.hidden = " << int_list_str(target.hidden) << "\n";
  os << "target.lr = " << target.lr << "\n";
  os << "target.seed = " << target_seed << "\n";
  return os.str();
}

void RunConfig::write_echo(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write config echo: " + path);
  os << echo();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t RunConfig::hash() const { return fnv1a(echo()); }

}  // namespace maze
