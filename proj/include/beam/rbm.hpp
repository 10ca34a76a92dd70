#pragma once

#include <cstddef>
#include <vector>

#include "beam/rng.hpp"

namespace beam {

enum class LayerKind { bernoulli, gaussian };

// Restricted Boltzmann machine with a Bernoulli hidden layer and either a
// Bernoulli or Gaussian visible layer:
//
//   E(v,h) = -sum_i a_i(v_i) - sum_u b_u h_u - sum_iu W_iu (v_i / s_i^2) h_u
//
// where a_i(v) = loc_i * v for Bernoulli visibles and
// a_i(v) = -(v - loc_i)^2 / (2 s_i^2) for Gaussian visibles. Scales are kept
// as log(s_i) so gradient steps can never drive them negative; Bernoulli
// visibles pin log-scale at 0.
struct RbmModel {
  int n_visible = 0;
  int n_hidden = 0;
  LayerKind visible_kind = LayerKind::bernoulli;
  std::vector<double> visible_loc;        // n_visible
  std::vector<double> visible_log_scale;  // n_visible
  std::vector<double> hidden_bias;        // n_hidden
  std::vector<double> weights;            // n_visible x n_hidden, row-major

  static RbmModel make(int n_visible, int n_hidden, LayerKind visible_kind);

  double w(int i, int u) const {
    return weights[static_cast<std::size_t>(i) * n_hidden + u];
  }
  double sigma2(int i) const;
  std::size_t n_params() const;
  bool finite() const;
};

struct State {
  std::vector<double> v, h;
};

// Per-unit parameters of p(v|h): Bernoulli visibles fill mean only, Gaussian
// visibles fill mean and variance.
struct VisibleParams {
  std::vector<double> mean;
  std::vector<double> var;
};

// Parameter-shaped accumulator laid out exactly like the model.
struct GradientBundle {
  std::vector<double> visible_loc, visible_log_scale, hidden_bias, weights;

  static GradientBundle zeros(const RbmModel& m);
  void add_scaled(double a, const GradientBundle& g);  // this += a * g
  void scale(double a);
  bool finite() const;
  double max_abs() const;
};

double sigmoid(double x);

double energy(const RbmModel& m, const State& s);

// mean of p(h|v) at inverse temperature beta:
// sigmoid(beta * (b_u + sum_i W_iu v_i / s_i^2))
void hidden_conditional(const RbmModel& m, const std::vector<double>& v,
                        double beta, std::vector<double>& mean);

// hidden_conditional at beta = 1; the feature map the critic sees
void hidden_mean_activation(const RbmModel& m, const std::vector<double>& v,
                            std::vector<double>& mean);

void visible_conditional(const RbmModel& m, const std::vector<double>& h,
                         double beta, VisibleParams& out);

void sample_hidden(const RbmModel& m, const std::vector<double>& v, double beta,
                   RngStream& rng, std::vector<double>& h);
void sample_visible(const RbmModel& m, const std::vector<double>& h, double beta,
                    RngStream& rng, std::vector<double>& v);

// one sweep: h ~ p(h|v) then v ~ p(v|h), in place
void gibbs_step(const RbmModel& m, State& s, double beta, RngStream& rng);

// -dE/dtheta at one state
GradientBundle neg_energy_grad(const RbmModel& m, const State& s);

// mean over rows of -dE/dtheta; v is n x n_visible, h is n x n_hidden
// (sampled states or conditional means), both row-major
GradientBundle mean_neg_energy_grad(const RbmModel& m, const double* v,
                                    const double* h, int n);

// rows: n x n_visible -> out: n x n_hidden, hidden_mean_activation per row
void batch_hidden_means(const RbmModel& m, const double* rows, int n,
                        double* out);

// log Z at inverse temperature beta by exhaustive enumeration (Gaussian
// visibles are integrated out analytically per hidden configuration).
// Throws beyond 20 enumerable units.
double exact_log_partition(const RbmModel& m, double beta);

}  // namespace beam
