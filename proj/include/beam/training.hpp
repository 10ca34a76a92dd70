#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "beam/critic.hpp"
#include "beam/datasets.hpp"
#include "beam/divergences.hpp"
#include "beam/rbm.hpp"
#include "beam/tds.hpp"

namespace beam {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  GradientBundle m, v;
  long long step = 0;

  static AdamState zeros(const RbmModel& model);
};

struct TrainConfig {
  int epochs_ml = 0;   // phase 1, likelihood only
  int epochs_adv = 0;  // phase 2, compound objective at gamma
  double gamma = 0.5;
  double lr_ml = 0.1;
  double lr_adv = 0.1;
  double decay = 0.0;  // lr = lr0 / (1 + decay * epoch_in_phase)
  int batch = 100;
  AdamConfig adam;

  int total_epochs() const { return epochs_ml + epochs_adv; }
  void validate() const;
};

// thrown when a loss, gradient, or parameter stops being finite
struct NonFiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// likelihood gradient: data-side mean of -dE minus fantasy-side mean of -dE.
// data_h carries the data rows' hidden values; conditional means give the
// exact conditional expectation since -dE is linear in h.
GradientBundle ml_gradient(const RbmModel& model, const double* data_v,
                           const double* data_h, int n_data,
                           const ParticlePopulation& fantasy);

// covariance under weights w (summing to 1) between a scalar per state and
// -dE/dtheta: sum_r w_r t_r g_r - (sum_r w_r t_r)(sum_r w_r g_r)
GradientBundle weighted_critic_covariance(const RbmModel& model,
                                          const double* v, const double* h,
                                          const double* t, const double* w,
                                          int n);

// adversary gradient Cov[T, -dE] over the particle population with uniform
// 1/m weights; needs at least two particles
GradientBundle adversarial_gradient(const RbmModel& model,
                                    const ParticlePopulation& fantasy,
                                    const std::vector<double>& critic_values);

// descent direction for the compound objective -gamma * L - (1-gamma) * A
GradientBundle compound_gradient(const GradientBundle& ml,
                                 const GradientBundle& adv, double gamma);

double lr_schedule(double lr0, double decay, int epoch);

void adam_step(RbmModel& model, const GradientBundle& grad, AdamState& state,
               const AdamConfig& cfg, double lr);

struct EpochMetrics {
  int epoch = 0;
  bool adversarial_phase = false;
  DivergenceReport divergences;
  double mean_beta = 1.0;
  double learning_rate = 0.0;
};

using EpochObserver = std::function<void(const EpochMetrics&)>;

// Everything training carries across epochs; checkpoints serialize this
// struct so an interrupted run can resume bit-for-bit.
struct TrainState {
  RbmModel model;
  AdamState adam;
  ParticlePopulation population;
  CriticCache cache;
  RngStream shuffle_rng;
  int epochs_done = 0;
};

TrainState init_train_state(const RbmModel& model, const TrainConfig& train,
                            const TdsConfig& tds, const CriticConfig& critic,
                            std::uint64_t seed);

// Runs epochs [state.epochs_done, train.total_epochs()): each gradient
// evaluation advances the persistent particles, scores them with the critic
// cached from the previous minibatch, applies one Adam update, and then
// replaces the critic cache with this minibatch's activations. Adam moments
// reset at the phase boundary. Throws NonFiniteError if parameters or
// gradients stop being finite.
void train(TrainState& state, const Dataset& data, const TrainConfig& train_cfg,
           const TdsConfig& tds_cfg, const CriticConfig& critic_cfg,
           const EpochObserver& observer);

}  // namespace beam
