#pragma once

#include <iosfwd>
#include <string>

#include "beam/config.hpp"
#include "beam/training.hpp"

namespace beam {

// filesystem layout of one experiment run
struct RunPaths {
  std::string dir;

  std::string metrics() const { return dir + "/metrics.csv"; }
  std::string samples(int epoch) const;
  std::string samples_final() const { return dir + "/samples_final.csv"; }
  std::string samples_eval() const { return dir + "/samples_eval.csv"; }
  std::string checkpoint(int epoch) const;
  std::string checkpoint_final() const { return dir + "/checkpoint_final.ckpt"; }
  std::string eval_report() const { return dir + "/eval.csv"; }
};

// Resolves the output directory (first of: cli_dir, config output.dir,
// $BEAM_OUT_ROOT/<config stem>, runs/<config stem>) and creates it.
RunPaths prepare_out_dir(const ExperimentConfig& cfg, const std::string& cli_dir,
                         const std::string& config_path);

// Draws or loads the configured dataset and carves out the validation split.
// All randomness derives from the config seed, so the same config rebuilds
// the same dataset.
Dataset build_dataset(const ExperimentConfig& cfg);

// Moment-matched starting point: weights ~ (0.01 / sqrt(n_visible)) N(0,1),
// hidden biases zero; Gaussian visibles take the train columns' mean and
// floored stddev, Bernoulli visibles the clamped logit of the column mean.
RbmModel init_model(const ExperimentConfig& cfg, const Dataset& data);

// One particle row per line, comma separated: Gaussian models dump the
// conditional visible mean given each particle's hidden state, Bernoulli
// models the raw binary visibles.
void write_samples_csv(const std::string& path, const RbmModel& model,
                       const ParticlePopulation& pop);

// Full training run: metrics.csv row per epoch, sample dumps and checkpoints
// on the configured cadence plus the likelihood->adversarial boundary, and a
// final checkpoint + sample dump. log (may be null) gets a progress line per
// epoch.
void run_experiment(const ExperimentConfig& cfg, const RunPaths& paths,
                    std::ostream* log);

// Continues a checkpointed run to the configured epoch budget. The dataset is
// rebuilt from the config, so the config must be the one the checkpoint was
// trained under. metrics.csv in the (possibly different) output directory
// holds only the epochs this invocation ran.
void resume_experiment(const ExperimentConfig& cfg, const RunPaths& paths,
                       const std::string& checkpoint_path, std::ostream* log);

// Scores a trained model against the validation split using a fresh, burned-in
// particle population on independent streams; writes eval.csv and
// samples_eval.csv.
void eval_experiment(const ExperimentConfig& cfg, const RunPaths& paths,
                     const std::string& checkpoint_path, std::ostream* log);

}  // namespace beam
