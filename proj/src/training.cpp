#include "beam/training.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace beam {

AdamState AdamState::zeros(const RbmModel& model) {
  AdamState s;
  s.m = GradientBundle::zeros(model);
  s.v = GradientBundle::zeros(model);
  s.step = 0;
  return s;
}

void TrainConfig::validate() const {
  if (epochs_ml < 0 || epochs_adv < 0 || total_epochs() < 1) {
    throw std::invalid_argument("train: need a positive number of epochs");
  }
  if (!(gamma >= 0.0) || gamma > 1.0) {
    throw std::invalid_argument("train: gamma must lie in [0, 1]");
  }
  if (!(lr_ml > 0.0) || !(lr_adv > 0.0)) {
    throw std::invalid_argument("train: learning rates must be positive");
  }
  if (!(decay >= 0.0)) throw std::invalid_argument("train: decay must be >= 0");
  if (batch < 2) throw std::invalid_argument("train: batch must be >= 2");
  if (!(adam.beta1 >= 0.0) || adam.beta1 >= 1.0 || !(adam.beta2 >= 0.0) ||
      adam.beta2 >= 1.0) {
    throw std::invalid_argument("train: adam betas must lie in [0, 1)");
  }
  if (!(adam.epsilon > 0.0)) {
    throw std::invalid_argument("train: adam epsilon must be positive");
  }
}

GradientBundle ml_gradient(const RbmModel& model, const double* data_v,
                           const double* data_h, int n_data,
                           const ParticlePopulation& fantasy) {
  if (n_data < 1) {
    throw std::invalid_argument("ml_gradient: empty data batch");
  }
  if (fantasy.size() < 1) {
    throw std::invalid_argument("ml_gradient: empty fantasy batch");
  }
  GradientBundle g = mean_neg_energy_grad(model, data_v, data_h, n_data);
  const std::vector<double> fv = fantasy.visible_matrix();
  const std::vector<double> fh = fantasy.hidden_matrix();
  GradientBundle f = mean_neg_energy_grad(model, fv.data(), fh.data(),
                                          fantasy.size());
  g.add_scaled(-1.0, f);
  return g;
}

GradientBundle weighted_critic_covariance(const RbmModel& model,
                                          const double* v, const double* h,
                                          const double* t, const double* w,
                                          int n) {
  if (n < 1) throw std::invalid_argument("critic covariance: empty batch");
  const int nv = model.n_visible;
  const int nh = model.n_hidden;
  const bool gauss = model.visible_kind == LayerKind::gaussian;
  std::vector<double> inv_s2(nv);
  for (int i = 0; i < nv; ++i) inv_s2[i] = 1.0 / model.sigma2(i);

  double t_mean = 0.0;
  for (int r = 0; r < n; ++r) t_mean += w[r] * t[r];

  GradientBundle g = GradientBundle::zeros(model);

#pragma omp parallel for schedule(static)
  for (int i = 0; i < nv; ++i) {
    const double* wrow = &model.weights[static_cast<std::size_t>(i) * nh];
    double* grow = &g.weights[static_cast<std::size_t>(i) * nh];
    std::vector<double> sw(nh, 0.0);  // sum_r w_r g_r per weight
    double loc_w = 0.0, loc_wt = 0.0;
    double ls_w = 0.0, ls_wt = 0.0;
    for (int r = 0; r < n; ++r) {
      const double vi = v[static_cast<std::size_t>(r) * nv + i];
      const double* hrow = &h[static_cast<std::size_t>(r) * nh];
      const double c = vi * inv_s2[i];
      const double wr = w[r];
      const double wtr = w[r] * t[r];
      for (int u = 0; u < nh; ++u) {
        sw[u] += wr * (c * hrow[u]);
        grow[u] += wtr * (c * hrow[u]);
      }
      double loc_g, ls_g;
      if (gauss) {
        double coupling = 0.0;
        for (int u = 0; u < nh; ++u) coupling += wrow[u] * hrow[u];
        double d = vi - model.visible_loc[i];
        loc_g = d * inv_s2[i];
        ls_g = d * d * inv_s2[i] - 2.0 * c * coupling;
      } else {
        loc_g = vi;
        ls_g = 0.0;
      }
      loc_w += wr * loc_g;
      loc_wt += wtr * loc_g;
      ls_w += wr * ls_g;
      ls_wt += wtr * ls_g;
    }
    for (int u = 0; u < nh; ++u) grow[u] -= t_mean * sw[u];
    g.visible_loc[i] = loc_wt - t_mean * loc_w;
    g.visible_log_scale[i] = ls_wt - t_mean * ls_w;
  }

#pragma omp parallel for schedule(static)
  for (int u = 0; u < nh; ++u) {
    double s_w = 0.0, s_wt = 0.0;
    for (int r = 0; r < n; ++r) {
      const double hu = h[static_cast<std::size_t>(r) * nh + u];
      s_w += w[r] * hu;
      s_wt += w[r] * t[r] * hu;
    }
    g.hidden_bias[u] = s_wt - t_mean * s_w;
  }
  return g;
}

GradientBundle adversarial_gradient(const RbmModel& model,
                                    const ParticlePopulation& fantasy,
                                    const std::vector<double>& critic_values) {
  const int n = fantasy.size();
  if (n < 2) {
    throw std::invalid_argument("adversarial_gradient: need at least 2 particles");
  }
  if (static_cast<int>(critic_values.size()) != n) {
    throw std::invalid_argument(
        "adversarial_gradient: critic values do not match particle count");
  }
  const std::vector<double> fv = fantasy.visible_matrix();
  const std::vector<double> fh = fantasy.hidden_matrix();
  std::vector<double> w(static_cast<std::size_t>(n), 1.0 / n);
  return weighted_critic_covariance(model, fv.data(), fh.data(),
                                    critic_values.data(), w.data(), n);
}

GradientBundle compound_gradient(const GradientBundle& ml,
                                 const GradientBundle& adv, double gamma) {
  if (!(gamma >= 0.0) || gamma > 1.0) {
    throw std::invalid_argument("compound_gradient: gamma must lie in [0, 1]");
  }
  GradientBundle g = ml;
  g.scale(-gamma);
  g.add_scaled(-(1.0 - gamma), adv);
  return g;
}

double lr_schedule(double lr0, double decay, int epoch) {
  return lr0 / (1.0 + decay * static_cast<double>(epoch));
}

void adam_step(RbmModel& model, const GradientBundle& grad, AdamState& state,
               const AdamConfig& cfg, double lr) {
  state.step += 1;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  auto update = [&](std::vector<double>& theta, std::vector<double>& m,
                    std::vector<double>& v, const std::vector<double>& g) {
    const std::size_t n = theta.size();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      theta[i] -= lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
  };
  update(model.visible_loc, state.m.visible_loc, state.v.visible_loc,
         grad.visible_loc);
  if (model.visible_kind == LayerKind::gaussian) {
    update(model.visible_log_scale, state.m.visible_log_scale,
           state.v.visible_log_scale, grad.visible_log_scale);
  }
  update(model.hidden_bias, state.m.hidden_bias, state.v.hidden_bias,
         grad.hidden_bias);
  update(model.weights, state.m.weights, state.v.weights, grad.weights);
}

TrainState init_train_state(const RbmModel& model, const TrainConfig& train,
                            const TdsConfig& tds, const CriticConfig& critic,
                            std::uint64_t seed) {
  train.validate();
  tds.validate();
  if (critic.k < 1) throw std::invalid_argument("critic: k must be >= 1");
  if (!(critic.epsilon > 0.0)) {
    throw std::invalid_argument("critic: epsilon must be positive");
  }
  TrainState s;
  s.model = model;
  s.adam = AdamState::zeros(model);
  s.population = init_population(model, tds, seed);
  s.cache.k = critic.k;
  s.cache.epsilon = critic.epsilon;
  s.shuffle_rng = RngStream(seed, stream_id(Stream::shuffle));
  s.epochs_done = 0;
  return s;
}

void train(TrainState& state, const Dataset& data, const TrainConfig& train_cfg,
           const TdsConfig& tds_cfg, const CriticConfig& critic_cfg,
           const EpochObserver& observer) {
  train_cfg.validate();
  tds_cfg.validate();
  if (data.dim != state.model.n_visible) {
    throw std::invalid_argument("train: dataset dimension does not match model");
  }

  const int nh = state.model.n_hidden;
  const int m = state.population.size();
  const std::vector<double> val_rows = gather_rows(data, data.validation_idx);
  const int n_val = static_cast<int>(data.validation_idx.size());

  for (int epoch = state.epochs_done; epoch < train_cfg.total_epochs(); ++epoch) {
    const bool adv_phase = epoch >= train_cfg.epochs_ml;
    if (adv_phase && epoch == train_cfg.epochs_ml) {
      state.adam = AdamState::zeros(state.model);  // fresh moments per phase
    }
    const int epoch_in_phase = adv_phase ? epoch - train_cfg.epochs_ml : epoch;
    const double lr = lr_schedule(adv_phase ? train_cfg.lr_adv : train_cfg.lr_ml,
                                  train_cfg.decay, epoch_in_phase);
    const double gamma = adv_phase ? train_cfg.gamma : 1.0;

    const auto blocks = minibatches(data, train_cfg.batch, state.shuffle_rng);
    if (blocks.empty()) {
      throw std::invalid_argument("train: batch size exceeds the train split");
    }

    for (const auto& block : blocks) {
      advance(state.model, tds_cfg, state.population, tds_cfg.steps_per_grad);

      const std::vector<double> data_v = gather_rows(data, block);
      const int n_data = static_cast<int>(block.size());
      std::vector<double> data_feat(static_cast<std::size_t>(n_data) * nh);
      batch_hidden_means(state.model, data_v.data(), n_data, data_feat.data());

      const std::vector<double> fantasy_v = state.population.visible_matrix();
      std::vector<double> model_feat(static_cast<std::size_t>(m) * nh);
      batch_hidden_means(state.model, fantasy_v.data(), m, model_feat.data());

      GradientBundle ml =
          ml_gradient(state.model, data_v.data(), data_feat.data(), n_data,
                      state.population);
      GradientBundle grad;
      if (gamma < 1.0 && !state.cache.empty()) {
        std::vector<double> t(static_cast<std::size_t>(m));
        critic_values(state.cache, model_feat.data(), m, critic_cfg.weighted,
                      t.data());
        GradientBundle adv = adversarial_gradient(state.model, state.population, t);
        grad = compound_gradient(ml, adv, gamma);
      } else {
        // no critic signal yet (or pure-likelihood phase)
        grad = compound_gradient(ml, GradientBundle::zeros(state.model), gamma);
      }

      if (!grad.finite()) {
        throw NonFiniteError("train: non-finite gradient at epoch " +
                             std::to_string(epoch));
      }
      adam_step(state.model, grad, state.adam, train_cfg.adam, lr);
      if (!state.model.finite()) {
        throw NonFiniteError("train: non-finite parameters at epoch " +
                             std::to_string(epoch));
      }

      update_cache(state.cache, data_feat.data(), n_data, model_feat.data(), m,
                   nh);
    }

    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.adversarial_phase = adv_phase;
    metrics.mean_beta = state.population.mean_beta();
    metrics.learning_rate = lr;
    if (n_val >= 2) {
      metrics.divergences = monitor(val_rows.data(), n_val, state.population,
                                    std::min(train_cfg.batch, n_val));
    } else {
      metrics.divergences.forward_kl = std::nan("");
      metrics.divergences.reverse_kl = std::nan("");
      metrics.divergences.n_minibatches_averaged = 0;
    }
    metrics.divergences.epoch = epoch;
    state.epochs_done = epoch + 1;
    if (observer) observer(metrics);
  }
}

}  // namespace beam
