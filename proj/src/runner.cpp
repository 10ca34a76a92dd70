#include "beam/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "beam/checkpoint.hpp"
#include "beam/textio.hpp"

namespace beam {

namespace {

std::string epoch_name(const char* prefix, int epoch, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_epoch%03d.%s", prefix, epoch, ext);
  return buf;
}

void write_metrics_header(std::ostream& out) {
  out << "# beam metrics v1\n";
  out << "epoch,phase,forward_kl,reverse_kl,mean_beta,learning_rate\n";
}

std::string metrics_row(const EpochMetrics& em) {
  std::string row = std::to_string(em.epoch);
  row += em.adversarial_phase ? ",adv," : ",ml,";
  row += format_double(em.divergences.forward_kl);
  row += ',';
  row += format_double(em.divergences.reverse_kl);
  row += ',';
  row += format_double(em.mean_beta);
  row += ',';
  row += format_double(em.learning_rate);
  return row;
}

// shared by run and resume: train to the epoch budget, recording as we go
void drive(const ExperimentConfig& cfg, const RunPaths& paths,
           const Dataset& data, TrainState& state, std::ostream* log) {
  const TdsConfig tds_cfg = cfg.tds(cfg.train.batch);
  std::ofstream metrics(paths.metrics());
  if (!metrics) {
    throw std::runtime_error("runner: cannot write " + paths.metrics());
  }
  write_metrics_header(metrics);

  const int total = cfg.train.total_epochs();
  EpochObserver observer = [&](const EpochMetrics& em) {
    metrics << metrics_row(em) << '\n' << std::flush;
    const int done = em.epoch + 1;
    const bool phase_boundary =
        done == cfg.train.epochs_ml && cfg.train.epochs_adv > 0;
    if (phase_boundary ||
        (cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0)) {
      save_checkpoint(paths.checkpoint(done), state);
    }
    if (cfg.sample_every > 0 && done % cfg.sample_every == 0 && done < total) {
      write_samples_csv(paths.samples(done), state.model, state.population);
    }
    if (log) {
      (*log) << "epoch " << done << '/' << total
             << (em.adversarial_phase ? " [adv]" : " [ml]")
             << " forward_kl=" << format_double(em.divergences.forward_kl)
             << " reverse_kl=" << format_double(em.divergences.reverse_kl)
             << " mean_beta=" << format_double(em.mean_beta)
             << " lr=" << format_double(em.learning_rate) << '\n'
             << std::flush;
    }
  };

  train(state, data, cfg.train, tds_cfg, cfg.critic, observer);
  save_checkpoint(paths.checkpoint_final(), state);
  write_samples_csv(paths.samples_final(), state.model, state.population);
}

}  // namespace

std::string RunPaths::samples(int epoch) const {
  return dir + '/' + epoch_name("samples", epoch, "csv");
}

std::string RunPaths::checkpoint(int epoch) const {
  return dir + '/' + epoch_name("checkpoint", epoch, "ckpt");
}

RunPaths prepare_out_dir(const ExperimentConfig& cfg, const std::string& cli_dir,
                         const std::string& config_path) {
  std::string dir = cli_dir.empty() ? cfg.out_dir : cli_dir;
  if (dir.empty()) {
    std::string stem = std::filesystem::path(config_path).stem().string();
    if (stem.empty()) stem = "run";
    const char* root = std::getenv("BEAM_OUT_ROOT");
    dir = (root && *root) ? std::string(root) + "/" + stem : "runs/" + stem;
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("runner: cannot create output directory '" + dir +
                             "': " + ec.message());
  }
  return RunPaths{dir};
}

Dataset build_dataset(const ExperimentConfig& cfg) {
  Dataset data;
  if (cfg.is_mog()) {
    RngStream rng(cfg.seed, stream_id(Stream::data_gen));
    data = mog_sample(cfg.mog(), cfg.dataset_n, rng);
  } else if (cfg.dataset_kind == "mnist_continuous") {
    data = mnist_load(cfg.dataset_path, MnistVariant::continuous);
  } else if (cfg.dataset_kind == "mnist_binary") {
    data = mnist_load(cfg.dataset_path, MnistVariant::binary);
  } else {
    throw ConfigError("config: dataset.kind: unknown kind '" +
                      cfg.dataset_kind + "'");
  }
  RngStream split_rng(cfg.seed, stream_id(Stream::split));
  split_validation(data, cfg.validation_fraction, split_rng);
  return data;
}

RbmModel init_model(const ExperimentConfig& cfg, const Dataset& data) {
  RbmModel m = RbmModel::make(data.dim, cfg.n_hidden, data.kind);

  std::vector<double> mean, stddev;
  train_column_moments(data, mean, stddev);
  if (m.visible_kind == LayerKind::gaussian) {
    for (int i = 0; i < m.n_visible; ++i) {
      m.visible_loc[i] = mean[i];
      m.visible_log_scale[i] = std::log(std::max(stddev[i], 0.05));
    }
  } else {
    for (int i = 0; i < m.n_visible; ++i) {
      const double p = std::clamp(mean[i], 1e-3, 1.0 - 1e-3);
      m.visible_loc[i] = std::log(p / (1.0 - p));
    }
  }

  RngStream rng(cfg.seed, stream_id(Stream::model_init));
  const double scale = 0.01 / std::sqrt(static_cast<double>(m.n_visible));
  for (double& w : m.weights) w = scale * rng.normal();
  return m;
}

void write_samples_csv(const std::string& path, const RbmModel& model,
                       const ParticlePopulation& pop) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("runner: cannot write " + path);
  out << "# beam samples v1 dim=" << model.n_visible << " n=" << pop.size()
      << '\n';
  VisibleParams params;
  for (const Particle& p : pop.particles) {
    const std::vector<double>* row = &p.state.v;
    if (model.visible_kind == LayerKind::gaussian) {
      visible_conditional(model, p.state.h, 1.0, params);
      row = &params.mean;
    }
    for (int i = 0; i < model.n_visible; ++i) {
      if (i) out << ',';
      out << format_double((*row)[i]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("runner: failed writing " + path);
}

void run_experiment(const ExperimentConfig& cfg, const RunPaths& paths,
                    std::ostream* log) {
  const Dataset data = build_dataset(cfg);
  const RbmModel model = init_model(cfg, data);
  TrainState state = init_train_state(model, cfg.train, cfg.tds(cfg.train.batch),
                                      cfg.critic, cfg.seed);
  drive(cfg, paths, data, state, log);
}

void resume_experiment(const ExperimentConfig& cfg, const RunPaths& paths,
                       const std::string& checkpoint_path, std::ostream* log) {
  const Dataset data = build_dataset(cfg);
  TrainState state = load_checkpoint(checkpoint_path);
  if (state.model.n_visible != data.dim) {
    throw std::runtime_error(
        "resume: checkpoint model does not match the configured dataset");
  }
  drive(cfg, paths, data, state, log);
}

void eval_experiment(const ExperimentConfig& cfg, const RunPaths& paths,
                     const std::string& checkpoint_path, std::ostream* log) {
  const Dataset data = build_dataset(cfg);
  const TrainState stored = load_checkpoint(checkpoint_path);
  const RbmModel& model = stored.model;
  if (model.n_visible != data.dim) {
    throw std::runtime_error(
        "eval: checkpoint model does not match the configured dataset");
  }

  const TdsConfig tds_cfg = cfg.tds(cfg.train.batch);
  RngStream seed_gen(cfg.seed, stream_id(Stream::eval));
  ParticlePopulation pop = init_population(model, tds_cfg, seed_gen.next_u64());
  advance(model, tds_cfg, pop, 10 * tds_cfg.steps_per_grad);

  const std::vector<double> val = gather_rows(data, data.validation_idx);
  const int n_val = static_cast<int>(data.validation_idx.size());
  EpochMetrics em;
  em.epoch = stored.epochs_done;
  em.adversarial_phase = stored.epochs_done > cfg.train.epochs_ml;
  em.mean_beta = pop.mean_beta();
  em.learning_rate = 0.0;
  if (n_val >= 2) {
    em.divergences = monitor(val.data(), n_val, pop,
                             std::min(cfg.train.batch, n_val));
  } else {
    em.divergences.forward_kl = std::nan("");
    em.divergences.reverse_kl = std::nan("");
  }

  std::ofstream report(paths.eval_report());
  if (!report) {
    throw std::runtime_error("runner: cannot write " + paths.eval_report());
  }
  write_metrics_header(report);
  report << metrics_row(em) << '\n';

  write_samples_csv(paths.samples_eval(), model, pop);
  if (log) {
    (*log) << "eval: epochs_done=" << stored.epochs_done
           << " forward_kl=" << format_double(em.divergences.forward_kl)
           << " reverse_kl=" << format_double(em.divergences.reverse_kl)
           << " mean_beta=" << format_double(em.mean_beta) << '\n';
  }
}

}  // namespace beam
