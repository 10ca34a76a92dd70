#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "beam/critic.hpp"
#include "beam/datasets.hpp"
#include "beam/tds.hpp"
#include "beam/training.hpp"

namespace beam {

// user-fixable problem in a config file; the CLI exits 1 for these
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string out_dir;        // output.dir, optional
  int sample_every = 0;       // extra sample dumps every N epochs; 0 = off
  int checkpoint_every = 0;   // extra checkpoints every N epochs; 0 = off

  std::string dataset_kind;   // mog_bimodal | mog_ring | mog_grid |
                              // mog_custom | mnist_continuous | mnist_binary
  int dataset_n = 0;          // MoG draw count
  std::string dataset_path;   // MNIST image file
  double validation_fraction = 0.1;
  MogSpec custom_mog;

  int n_hidden = 0;

  int particles = 0;          // 0 means one per minibatch row
  double beta_std = 0.9;
  double phi = 0.9;
  int steps = 100;

  CriticConfig critic;
  TrainConfig train;

  bool is_mog() const { return dataset_kind.rfind("mog_", 0) == 0; }
  bool is_mnist() const { return dataset_kind.rfind("mnist_", 0) == 0; }
  MogSpec mog() const;        // resolved built-in or custom spec
  TdsConfig tds(int batch_fallback) const;
};

// Flat "key = value" lines, '#' comments, dotted section prefixes, later
// duplicates win. Unknown keys, malformed values, and contradictory or
// missing settings all raise ConfigError naming the key.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace beam
