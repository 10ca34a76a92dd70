#include "beam/reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace beam::ref {

namespace {

constexpr double kDistanceFloor = 1e-12;

std::vector<double> inverse_sigma2(const RbmModel& m) {
  std::vector<double> inv(m.n_visible);
  for (int i = 0; i < m.n_visible; ++i) inv[i] = 1.0 / m.sigma2(i);
  return inv;
}

double dist(const double* a, const double* b, int dim) {
  double d2 = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double t = a[d] - b[d];
    d2 += t * t;
  }
  return std::sqrt(d2);
}

}  // namespace

void batch_hidden_means(const RbmModel& m, const double* rows, int n,
                        double* out) {
  const int nv = m.n_visible;
  const int nh = m.n_hidden;
  std::vector<double> inv_s2 = inverse_sigma2(m);
  for (int r = 0; r < n; ++r) {
    const double* vrow = &rows[static_cast<std::size_t>(r) * nv];
    double* orow = &out[static_cast<std::size_t>(r) * nh];
    for (int u = 0; u < nh; ++u) orow[u] = m.hidden_bias[u];
    for (int i = 0; i < nv; ++i) {
      double c = vrow[i] * inv_s2[i];
      const double* wrow = &m.weights[static_cast<std::size_t>(i) * nh];
      for (int u = 0; u < nh; ++u) orow[u] += wrow[u] * c;
    }
    for (int u = 0; u < nh; ++u) orow[u] = sigmoid(1.0 * orow[u]);
  }
}

GradientBundle mean_neg_energy_grad(const RbmModel& m, const double* v,
                                    const double* h, int n) {
  if (n < 1) {
    throw std::invalid_argument("mean_neg_energy_grad: need at least one row");
  }
  GradientBundle g = GradientBundle::zeros(m);
  const int nv = m.n_visible;
  const int nh = m.n_hidden;
  const double inv_n = 1.0 / n;
  std::vector<double> inv_s2 = inverse_sigma2(m);
  const bool gauss = m.visible_kind == LayerKind::gaussian;

  for (int i = 0; i < nv; ++i) {
    const double* wrow = &m.weights[static_cast<std::size_t>(i) * nh];
    double* grow = &g.weights[static_cast<std::size_t>(i) * nh];
    double loc_acc = 0.0;
    double ls_acc = 0.0;
    for (int r = 0; r < n; ++r) {
      const double vi = v[static_cast<std::size_t>(r) * nv + i];
      const double* hrow = &h[static_cast<std::size_t>(r) * nh];
      const double c = vi * inv_s2[i];
      for (int u = 0; u < nh; ++u) grow[u] += c * hrow[u];
      if (gauss) {
        double coupling = 0.0;
        for (int u = 0; u < nh; ++u) coupling += wrow[u] * hrow[u];
        double d = vi - m.visible_loc[i];
        loc_acc += d * inv_s2[i];
        ls_acc += d * d * inv_s2[i] - 2.0 * c * coupling;
      } else {
        loc_acc += vi;
      }
    }
    for (int u = 0; u < nh; ++u) grow[u] *= inv_n;
    g.visible_loc[i] = loc_acc * inv_n;
    g.visible_log_scale[i] = gauss ? ls_acc * inv_n : 0.0;
  }

  for (int u = 0; u < nh; ++u) {
    double acc = 0.0;
    for (int r = 0; r < n; ++r) acc += h[static_cast<std::size_t>(r) * nh + u];
    g.hidden_bias[u] = acc * inv_n;
  }
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
  std::vector<double> inv_s2 = inverse_sigma2(model);

  double t_mean = 0.0;
  for (int r = 0; r < n; ++r) t_mean += w[r] * t[r];

  GradientBundle g = GradientBundle::zeros(model);

  for (int i = 0; i < nv; ++i) {
    const double* wrow = &model.weights[static_cast<std::size_t>(i) * nh];
    double* grow = &g.weights[static_cast<std::size_t>(i) * nh];
    std::vector<double> sw(nh, 0.0);
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

void advance(const RbmModel& m, const TdsConfig& cfg, ParticlePopulation& pop,
             int steps) {
  cfg.validate();
  if (steps < 0) throw std::invalid_argument("advance: steps must be >= 0");
  if (!pop.particles.empty() &&
      (static_cast<int>(pop.particles[0].state.v.size()) != m.n_visible ||
       static_cast<int>(pop.particles[0].state.h.size()) != m.n_hidden)) {
    throw std::invalid_argument("advance: population does not match model shape");
  }
  const int n = pop.size();
  for (int p = 0; p < n; ++p) {
    Particle& pt = pop.particles[p];
    for (int t = 0; t < steps; ++t) {
      if (cfg.var_beta > 0.0) {
        pt.beta = gamma_step(pt.beta, cfg.phi, cfg.var_beta, pt.beta_rng);
      }
      gibbs_step(m, pt.state, pt.beta, pt.state_rng);
    }
  }
}

void critic_values(const CriticCache& cache, const double* queries, int n,
                   bool weighted, double* out) {
  for (int q = 0; q < n; ++q) {
    const double* x = queries + static_cast<std::size_t>(q) * cache.dim;
    out[q] = weighted ? t_dnn(cache, x) : t_nn(cache, x);
  }
}

double knn_kl_estimate(const double* x, int n, const double* y, int m,
                       int dim) {
  if (n < 2) {
    throw std::invalid_argument("knn_kl_estimate: need at least 2 rows in X");
  }
  if (m < 1) {
    throw std::invalid_argument("knn_kl_estimate: need at least 1 row in Y");
  }
  if (dim < 1) throw std::invalid_argument("knn_kl_estimate: dim must be >= 1");

  std::vector<double> terms(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double* xi = x + static_cast<std::size_t>(i) * dim;
    double rho = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      rho = std::min(rho, dist(xi, x + static_cast<std::size_t>(j) * dim, dim));
    }
    double nu = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) {
      nu = std::min(nu, dist(xi, y + static_cast<std::size_t>(j) * dim, dim));
    }
    rho = std::max(rho, kDistanceFloor);
    nu = std::max(nu, kDistanceFloor);
    terms[i] = std::log(nu / rho);
  }
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += terms[i];
  return static_cast<double>(dim) / n * s +
         std::log(static_cast<double>(m) / (n - 1));
}

}  // namespace beam::ref
