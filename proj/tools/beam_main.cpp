// Command-line driver: run / validate / resume / eval over a config file.
// Exit codes: 0 success, 1 config problem, 2 runtime or I/O failure,
// 3 training diverged to non-finite values.
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "beam/checkpoint.hpp"
#include "beam/config.hpp"
#include "beam/runner.hpp"
#include "beam/textio.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string seed_override;
  std::string epochs_override;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_overrides) {
  cmd->add_option("config", args.config_path, "experiment config file")
      ->required();
  cmd->add_option("--out-dir", args.out_dir,
                  "output directory (overrides the config)");
  if (with_overrides) {
    cmd->add_option("--seed", args.seed_override, "override the config seed");
    cmd->add_option("--epochs-override", args.epochs_override,
                    "override the epoch budget as ML,ADV");
  }
}

beam::ExperimentConfig load_with_overrides(const CommonArgs& args) {
  beam::ExperimentConfig cfg = beam::parse_config_file(args.config_path);
  try {
    if (!args.seed_override.empty()) {
      cfg.seed = beam::parse_u64(args.seed_override, "--seed");
    }
    if (!args.epochs_override.empty()) {
      const std::string& s = args.epochs_override;
      const std::size_t comma = s.find(',');
      if (comma == std::string::npos) {
        throw beam::ConfigError("--epochs-override: expected ML,ADV");
      }
      cfg.train.epochs_ml = static_cast<int>(
          beam::parse_int(s.substr(0, comma), "--epochs-override"));
      cfg.train.epochs_adv = static_cast<int>(
          beam::parse_int(s.substr(comma + 1), "--epochs-override"));
      if (cfg.train.epochs_ml < 0 || cfg.train.epochs_adv < 0 ||
          cfg.train.total_epochs() < 1) {
        throw beam::ConfigError(
            "--epochs-override: need a positive epoch budget");
      }
    }
  } catch (const beam::ConfigError&) {
    throw;
  } catch (const std::exception& e) {  // flag parse errors are user-fixable
    throw beam::ConfigError(e.what());
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-phase adversarially regularized RBM trainer"};
  app.require_subcommand(1);

  CommonArgs run_args, validate_args, resume_args, eval_args;
  std::string resume_ckpt, eval_ckpt;

  CLI::App* run_cmd = app.add_subcommand("run", "train a model from scratch");
  add_common(run_cmd, run_args, true);

  CLI::App* validate_cmd =
      app.add_subcommand("validate", "check a config file and print a summary");
  add_common(validate_cmd, validate_args, true);

  CLI::App* resume_cmd =
      app.add_subcommand("resume", "continue training from a checkpoint");
  resume_cmd->add_option("checkpoint", resume_ckpt, "checkpoint file")
      ->required();
  add_common(resume_cmd, resume_args, true);

  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "score a checkpoint against the validation split");
  eval_cmd->add_option("checkpoint", eval_ckpt, "checkpoint file")->required();
  add_common(eval_cmd, eval_args, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      beam::ExperimentConfig cfg = load_with_overrides(run_args);
      beam::RunPaths paths =
          beam::prepare_out_dir(cfg, run_args.out_dir, run_args.config_path);
      std::cout << "run: writing to " << paths.dir << '\n';
      beam::run_experiment(cfg, paths, &std::cout);
      std::cout << "run: done\n";
    } else if (validate_cmd->parsed()) {
      beam::ExperimentConfig cfg = load_with_overrides(validate_args);
      cfg.train.validate();
      cfg.tds(cfg.train.batch).validate();
      std::cout << "config ok: dataset=" << cfg.dataset_kind
                << " hidden=" << cfg.n_hidden
                << " epochs=" << cfg.train.epochs_ml << '+'
                << cfg.train.epochs_adv << " gamma=" << cfg.train.gamma
                << " seed=" << cfg.seed << '\n';
    } else if (resume_cmd->parsed()) {
      beam::ExperimentConfig cfg = load_with_overrides(resume_args);
      beam::RunPaths paths = beam::prepare_out_dir(cfg, resume_args.out_dir,
                                                   resume_args.config_path);
      std::cout << "resume: writing to " << paths.dir << '\n';
      beam::resume_experiment(cfg, paths, resume_ckpt, &std::cout);
      std::cout << "resume: done\n";
    } else if (eval_cmd->parsed()) {
      beam::ExperimentConfig cfg = load_with_overrides(eval_args);
      beam::RunPaths paths =
          beam::prepare_out_dir(cfg, eval_args.out_dir, eval_args.config_path);
      beam::eval_experiment(cfg, paths, eval_ckpt, &std::cout);
    }
  } catch (const beam::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const beam::NonFiniteError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
