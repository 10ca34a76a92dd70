#include "beam/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "beam/textio.hpp"

namespace beam {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

const std::set<std::string> kKnownKeys = {
    "seed",
    "output.dir",
    "output.sample_every",
    "output.checkpoint_every",
    "dataset.kind",
    "dataset.n",
    "dataset.path",
    "dataset.validation_fraction",
    "dataset.modes",
    "dataset.weights",
    "dataset.std",
    "model.hidden",
    "sampler.particles",
    "sampler.steps",
    "sampler.beta_std",
    "sampler.phi",
    "critic.k",
    "critic.epsilon",
    "critic.weighted",
    "train.epochs_ml",
    "train.epochs_adv",
    "train.gamma",
    "train.lr",
    "train.lr_adv",
    "train.decay",
    "train.batch",
    "train.adam_beta1",
    "train.adam_beta2",
    "train.adam_epsilon",
};

const std::set<std::string> kDatasetKinds = {
    "mog_bimodal",  "mog_ring",         "mog_grid",
    "mog_custom",   "mnist_continuous", "mnist_binary",
};

struct KeyValues {
  std::map<std::string, std::string> kv;

  bool has(const std::string& k) const { return kv.count(k) != 0; }

  const std::string& require(const std::string& k) const {
    auto it = kv.find(k);
    if (it == kv.end()) {
      throw ConfigError("config: missing required key '" + k + "'");
    }
    return it->second;
  }

  std::string str(const std::string& k, const std::string& fallback) const {
    auto it = kv.find(k);
    return it == kv.end() ? fallback : it->second;
  }

  long long integer(const std::string& k, long long fallback) const {
    auto it = kv.find(k);
    if (it == kv.end()) return fallback;
    try {
      return parse_int(it->second, k);
    } catch (const std::exception&) {
      throw ConfigError("config: " + k + ": not an integer: '" + it->second + "'");
    }
  }

  double number(const std::string& k, double fallback) const {
    auto it = kv.find(k);
    if (it == kv.end()) return fallback;
    try {
      return parse_double(it->second, k);
    } catch (const std::exception&) {
      throw ConfigError("config: " + k + ": not a number: '" + it->second + "'");
    }
  }

  bool boolean(const std::string& k, bool fallback) const {
    auto it = kv.find(k);
    if (it == kv.end()) return fallback;
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    throw ConfigError("config: " + k + ": expected true or false, got '" +
                      it->second + "'");
  }
};

KeyValues parse_lines(const std::string& text, const std::string& origin) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: " + origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config: " + origin + ":" + std::to_string(lineno) +
                        ": empty key");
    }
    if (!kKnownKeys.count(key)) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
    out.kv[key] = value;  // later duplicates win
  }
  return out;
}

MogSpec parse_custom_mog(const KeyValues& kv) {
  MogSpec spec;
  const std::string modes = kv.require("dataset.modes");
  for (const std::string& part : split(modes, ';')) {
    if (part.empty()) continue;
    std::vector<double> mode;
    for (const std::string& coord : split(part, ',')) {
      try {
        mode.push_back(parse_double(coord, "dataset.modes"));
      } catch (const std::exception&) {
        throw ConfigError("config: dataset.modes: bad coordinate '" + coord + "'");
      }
    }
    spec.modes.push_back(std::move(mode));
  }
  if (kv.has("dataset.weights")) {
    for (const std::string& part : split(kv.require("dataset.weights"), ';')) {
      if (part.empty()) continue;
      try {
        spec.weights.push_back(parse_double(part, "dataset.weights"));
      } catch (const std::exception&) {
        throw ConfigError("config: dataset.weights: bad weight '" + part + "'");
      }
    }
  }
  spec.std_dev = kv.number("dataset.std", 0.0);
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: dataset.modes/std: ") + e.what());
  }
  return spec;
}

}  // namespace

MogSpec ExperimentConfig::mog() const {
  if (dataset_kind == "mog_bimodal") return bimodal_spec();
  if (dataset_kind == "mog_ring") return ring_spec();
  if (dataset_kind == "mog_grid") return grid_spec();
  if (dataset_kind == "mog_custom") return custom_mog;
  throw ConfigError("config: dataset.kind '" + dataset_kind + "' is not a MoG");
}

TdsConfig ExperimentConfig::tds(int batch_fallback) const {
  TdsConfig t;
  t.particles = particles > 0 ? particles : batch_fallback;
  t.phi = phi;
  t.var_beta = beta_std * beta_std;
  t.steps_per_grad = steps;
  return t;
}

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin) {
  KeyValues kv = parse_lines(text, origin);
  ExperimentConfig c;

  try {
    c.seed = parse_u64(kv.require("seed"), "seed");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("config: seed: not an unsigned integer");
  }

  c.out_dir = kv.str("output.dir", "");
  c.sample_every = static_cast<int>(kv.integer("output.sample_every", 0));
  c.checkpoint_every = static_cast<int>(kv.integer("output.checkpoint_every", 0));
  if (c.sample_every < 0) {
    throw ConfigError("config: output.sample_every: must be >= 0");
  }
  if (c.checkpoint_every < 0) {
    throw ConfigError("config: output.checkpoint_every: must be >= 0");
  }

  c.dataset_kind = kv.require("dataset.kind");
  if (!kDatasetKinds.count(c.dataset_kind)) {
    throw ConfigError("config: dataset.kind: unknown kind '" + c.dataset_kind +
                      "'");
  }
  c.validation_fraction = kv.number("dataset.validation_fraction", 0.1);
  if (!(c.validation_fraction > 0.0) || c.validation_fraction >= 1.0) {
    throw ConfigError("config: dataset.validation_fraction: must lie in (0, 1)");
  }
  if (c.is_mog()) {
    c.dataset_n = static_cast<int>(kv.integer("dataset.n", 0));
    if (c.dataset_n < 4) {
      throw ConfigError("config: dataset.n: required for MoG datasets (>= 4)");
    }
    if (c.dataset_kind == "mog_custom") {
      c.custom_mog = parse_custom_mog(kv);
    }
  } else {
    c.dataset_path = kv.require("dataset.path");
    if (c.dataset_path.empty()) {
      throw ConfigError("config: dataset.path: must not be empty");
    }
  }

  c.n_hidden = static_cast<int>(kv.integer("model.hidden", 0));
  if (c.n_hidden < 1) {
    throw ConfigError("config: model.hidden: required, must be >= 1");
  }

  c.particles = static_cast<int>(kv.integer("sampler.particles", 0));
  if (c.particles < 0) {
    throw ConfigError("config: sampler.particles: must be >= 0");
  }
  c.steps = static_cast<int>(kv.integer("sampler.steps", 100));
  if (c.steps < 1) throw ConfigError("config: sampler.steps: must be >= 1");
  c.beta_std = kv.number("sampler.beta_std", 0.9);
  if (!(c.beta_std >= 0.0) || c.beta_std >= 1.0) {
    throw ConfigError("config: sampler.beta_std: must lie in [0, 1)");
  }
  c.phi = kv.number("sampler.phi", 0.9);
  if (!(c.phi >= 0.0) || c.phi >= 1.0) {
    throw ConfigError("config: sampler.phi: must lie in [0, 1)");
  }

  c.critic.k = static_cast<int>(kv.integer("critic.k", 5));
  if (c.critic.k < 1) throw ConfigError("config: critic.k: must be >= 1");
  c.critic.epsilon = kv.number("critic.epsilon", 1e-3);
  if (!(c.critic.epsilon > 0.0)) {
    throw ConfigError("config: critic.epsilon: must be positive");
  }
  c.critic.weighted = kv.boolean("critic.weighted", true);

  c.train.epochs_ml = static_cast<int>(kv.integer("train.epochs_ml", 0));
  c.train.epochs_adv = static_cast<int>(kv.integer("train.epochs_adv", 0));
  if (c.train.epochs_ml < 0 || c.train.epochs_adv < 0) {
    throw ConfigError("config: train.epochs_ml/epochs_adv: must be >= 0");
  }
  if (c.train.total_epochs() < 1) {
    throw ConfigError("config: train.epochs_ml + train.epochs_adv: must be >= 1");
  }
  c.train.gamma = kv.number("train.gamma", 0.5);
  if (!(c.train.gamma >= 0.0) || c.train.gamma > 1.0) {
    throw ConfigError("config: train.gamma: must lie in [0, 1]");
  }
  c.train.lr_ml = kv.number("train.lr", 0.0);
  if (!(c.train.lr_ml > 0.0)) {
    throw ConfigError("config: train.lr: required, must be positive");
  }
  c.train.lr_adv = kv.number("train.lr_adv", c.train.lr_ml);
  if (!(c.train.lr_adv > 0.0)) {
    throw ConfigError("config: train.lr_adv: must be positive");
  }
  c.train.decay = kv.number("train.decay", 0.0);
  if (!(c.train.decay >= 0.0)) {
    throw ConfigError("config: train.decay: must be >= 0");
  }
  c.train.batch = static_cast<int>(kv.integer("train.batch", 100));
  if (c.train.batch < 2) throw ConfigError("config: train.batch: must be >= 2");
  c.train.adam.beta1 = kv.number("train.adam_beta1", 0.9);
  c.train.adam.beta2 = kv.number("train.adam_beta2", 0.999);
  if (!(c.train.adam.beta1 >= 0.0) || c.train.adam.beta1 >= 1.0 ||
      !(c.train.adam.beta2 >= 0.0) || c.train.adam.beta2 >= 1.0) {
    throw ConfigError("config: train.adam_beta1/beta2: must lie in [0, 1)");
  }
  c.train.adam.epsilon = kv.number("train.adam_epsilon", 1e-8);
  if (!(c.train.adam.epsilon > 0.0)) {
    throw ConfigError("config: train.adam_epsilon: must be positive");
  }

  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace beam
