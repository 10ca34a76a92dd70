#include "beam/rbm.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace beam {

namespace {

void check_dim(int got, int want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": expected length " +
                                std::to_string(want) + ", got " +
                                std::to_string(got));
  }
}

std::vector<double> inverse_sigma2(const RbmModel& m) {
  std::vector<double> inv(m.n_visible);
  for (int i = 0; i < m.n_visible; ++i) inv[i] = 1.0 / m.sigma2(i);
  return inv;
}

}  // namespace

RbmModel RbmModel::make(int n_visible, int n_hidden, LayerKind visible_kind) {
  if (n_visible < 1 || n_hidden < 1) {
    throw std::invalid_argument("RbmModel: layer sizes must be positive");
  }
  RbmModel m;
  m.n_visible = n_visible;
  m.n_hidden = n_hidden;
  m.visible_kind = visible_kind;
  m.visible_loc.assign(n_visible, 0.0);
  m.visible_log_scale.assign(n_visible, 0.0);
  m.hidden_bias.assign(n_hidden, 0.0);
  m.weights.assign(static_cast<std::size_t>(n_visible) * n_hidden, 0.0);
  return m;
}

double RbmModel::sigma2(int i) const {
  return std::exp(2.0 * visible_log_scale[i]);
}

std::size_t RbmModel::n_params() const {
  return visible_loc.size() + visible_log_scale.size() + hidden_bias.size() +
         weights.size();
}

bool RbmModel::finite() const {
  auto ok = [](const std::vector<double>& x) {
    for (double a : x) {
      if (!std::isfinite(a)) return false;
    }
    return true;
  };
  return ok(visible_loc) && ok(visible_log_scale) && ok(hidden_bias) &&
         ok(weights);
}

GradientBundle GradientBundle::zeros(const RbmModel& m) {
  GradientBundle g;
  g.visible_loc.assign(m.n_visible, 0.0);
  g.visible_log_scale.assign(m.n_visible, 0.0);
  g.hidden_bias.assign(m.n_hidden, 0.0);
  g.weights.assign(static_cast<std::size_t>(m.n_visible) * m.n_hidden, 0.0);
  return g;
}

void GradientBundle::add_scaled(double a, const GradientBundle& g) {
  auto axpy = [a](std::vector<double>& x, const std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += a * y[i];
  };
  axpy(visible_loc, g.visible_loc);
  axpy(visible_log_scale, g.visible_log_scale);
  axpy(hidden_bias, g.hidden_bias);
  axpy(weights, g.weights);
}

void GradientBundle::scale(double a) {
  for (auto* vec : {&visible_loc, &visible_log_scale, &hidden_bias, &weights}) {
    for (double& x : *vec) x *= a;
  }
}

bool GradientBundle::finite() const {
  for (auto* vec : {&visible_loc, &visible_log_scale, &hidden_bias, &weights}) {
    for (double x : *vec) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

double GradientBundle::max_abs() const {
  double m = 0.0;
  for (auto* vec : {&visible_loc, &visible_log_scale, &hidden_bias, &weights}) {
    for (double x : *vec) m = std::max(m, std::abs(x));
  }
  return m;
}

double sigmoid(double x) {
  if (x >= 0.0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

double energy(const RbmModel& m, const State& s) {
  check_dim(static_cast<int>(s.v.size()), m.n_visible, "energy: v");
  check_dim(static_cast<int>(s.h.size()), m.n_hidden, "energy: h");
  std::vector<double> inv_s2 = inverse_sigma2(m);
  double e = 0.0;
  for (int i = 0; i < m.n_visible; ++i) {
    if (m.visible_kind == LayerKind::bernoulli) {
      e -= m.visible_loc[i] * s.v[i];
    } else {
      double d = s.v[i] - m.visible_loc[i];
      e += 0.5 * d * d * inv_s2[i];
    }
  }
  for (int u = 0; u < m.n_hidden; ++u) e -= m.hidden_bias[u] * s.h[u];
  for (int i = 0; i < m.n_visible; ++i) {
    const double* wrow = &m.weights[static_cast<std::size_t>(i) * m.n_hidden];
    double coupling = 0.0;
    for (int u = 0; u < m.n_hidden; ++u) coupling += wrow[u] * s.h[u];
    e -= s.v[i] * inv_s2[i] * coupling;
  }
  return e;
}

void hidden_conditional(const RbmModel& m, const std::vector<double>& v,
                        double beta, std::vector<double>& mean) {
  check_dim(static_cast<int>(v.size()), m.n_visible, "hidden_conditional: v");
  mean.assign(m.n_hidden, 0.0);
  std::vector<double> inv_s2 = inverse_sigma2(m);
  for (int u = 0; u < m.n_hidden; ++u) mean[u] = m.hidden_bias[u];
  for (int i = 0; i < m.n_visible; ++i) {
    double c = v[i] * inv_s2[i];
    const double* wrow = &m.weights[static_cast<std::size_t>(i) * m.n_hidden];
    for (int u = 0; u < m.n_hidden; ++u) mean[u] += wrow[u] * c;
  }
  for (int u = 0; u < m.n_hidden; ++u) mean[u] = sigmoid(beta * mean[u]);
}

void hidden_mean_activation(const RbmModel& m, const std::vector<double>& v,
                            std::vector<double>& mean) {
  hidden_conditional(m, v, 1.0, mean);
}

void visible_conditional(const RbmModel& m, const std::vector<double>& h,
                         double beta, VisibleParams& out) {
  check_dim(static_cast<int>(h.size()), m.n_hidden, "visible_conditional: h");
  if (!(beta > 0.0)) {
    throw std::invalid_argument("visible_conditional: beta must be positive");
  }
  out.mean.assign(m.n_visible, 0.0);
  out.var.clear();
  std::vector<double> inv_s2 = inverse_sigma2(m);
  for (int i = 0; i < m.n_visible; ++i) {
    const double* wrow = &m.weights[static_cast<std::size_t>(i) * m.n_hidden];
    double coupling = 0.0;
    for (int u = 0; u < m.n_hidden; ++u) coupling += wrow[u] * h[u];
    if (m.visible_kind == LayerKind::bernoulli) {
      // mean of p(v=1|h); scale is pinned at 1 for Bernoulli visibles
      out.mean[i] = sigmoid(beta * (m.visible_loc[i] + coupling * inv_s2[i]));
    } else {
      out.mean[i] = m.visible_loc[i] + coupling;
    }
  }
  if (m.visible_kind == LayerKind::gaussian) {
    out.var.assign(m.n_visible, 0.0);
    for (int i = 0; i < m.n_visible; ++i) out.var[i] = m.sigma2(i) / beta;
  }
}

void sample_hidden(const RbmModel& m, const std::vector<double>& v, double beta,
                   RngStream& rng, std::vector<double>& h) {
  std::vector<double> mean;
  hidden_conditional(m, v, beta, mean);
  h.resize(m.n_hidden);
  for (int u = 0; u < m.n_hidden; ++u) {
    h[u] = rng.uniform() < mean[u] ? 1.0 : 0.0;
  }
}

void sample_visible(const RbmModel& m, const std::vector<double>& h, double beta,
                    RngStream& rng, std::vector<double>& v) {
  VisibleParams p;
  visible_conditional(m, h, beta, p);
  v.resize(m.n_visible);
  if (m.visible_kind == LayerKind::bernoulli) {
    for (int i = 0; i < m.n_visible; ++i) {
      v[i] = rng.uniform() < p.mean[i] ? 1.0 : 0.0;
    }
  } else {
    for (int i = 0; i < m.n_visible; ++i) {
      v[i] = p.mean[i] + std::sqrt(p.var[i]) * rng.normal();
    }
  }
}

void gibbs_step(const RbmModel& m, State& s, double beta, RngStream& rng) {
  sample_hidden(m, s.v, beta, rng, s.h);
  sample_visible(m, s.h, beta, rng, s.v);
}

GradientBundle neg_energy_grad(const RbmModel& m, const State& s) {
  check_dim(static_cast<int>(s.v.size()), m.n_visible, "neg_energy_grad: v");
  check_dim(static_cast<int>(s.h.size()), m.n_hidden, "neg_energy_grad: h");
  return mean_neg_energy_grad(m, s.v.data(), s.h.data(), 1);
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

#pragma omp parallel for schedule(static)
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

#pragma omp parallel for schedule(static)
  for (int u = 0; u < nh; ++u) {
    double acc = 0.0;
    for (int r = 0; r < n; ++r) acc += h[static_cast<std::size_t>(r) * nh + u];
    g.hidden_bias[u] = acc * inv_n;
  }
  return g;
}

void batch_hidden_means(const RbmModel& m, const double* rows, int n,
                        double* out) {
  const int nv = m.n_visible;
  const int nh = m.n_hidden;
  std::vector<double> inv_s2 = inverse_sigma2(m);
#pragma omp parallel for schedule(static)
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

namespace {

double logsumexp(const std::vector<double>& xs) {
  double mx = xs[0];
  for (double x : xs) mx = std::max(mx, x);
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

double exact_log_partition(const RbmModel& m, double beta) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("exact_log_partition: beta must be positive");
  }
  const int nv = m.n_visible;
  const int nh = m.n_hidden;
  if (m.visible_kind == LayerKind::bernoulli) {
    if (nv + nh > 20) {
      throw std::invalid_argument(
          "exact_log_partition: at most 20 units for Bernoulli enumeration");
    }
    std::vector<double> terms;
    terms.reserve(std::size_t{1} << (nv + nh));
    State s;
    s.v.assign(nv, 0.0);
    s.h.assign(nh, 0.0);
    for (std::uint64_t vm = 0; vm < (std::uint64_t{1} << nv); ++vm) {
      for (int i = 0; i < nv; ++i) s.v[i] = (vm >> i) & 1 ? 1.0 : 0.0;
      for (std::uint64_t hm = 0; hm < (std::uint64_t{1} << nh); ++hm) {
        for (int u = 0; u < nh; ++u) s.h[u] = (hm >> u) & 1 ? 1.0 : 0.0;
        terms.push_back(-beta * energy(m, s));
      }
    }
    return logsumexp(terms);
  }
  if (nh > 20) {
    throw std::invalid_argument(
        "exact_log_partition: at most 20 hidden units for Gaussian enumeration");
  }
  // Integrate the Gaussian visibles out in closed form per hidden word.
  std::vector<double> terms;
  terms.reserve(std::size_t{1} << nh);
  std::vector<double> h(nh);
  for (std::uint64_t hm = 0; hm < (std::uint64_t{1} << nh); ++hm) {
    for (int u = 0; u < nh; ++u) h[u] = (hm >> u) & 1 ? 1.0 : 0.0;
    double t = 0.0;
    for (int u = 0; u < nh; ++u) t += beta * m.hidden_bias[u] * h[u];
    for (int i = 0; i < nv; ++i) {
      const double* wrow = &m.weights[static_cast<std::size_t>(i) * nh];
      double f = 0.0;
      for (int u = 0; u < nh; ++u) f += wrow[u] * h[u];
      double s2 = m.sigma2(i);
      double loc = m.visible_loc[i];
      t += 0.5 * std::log(2.0 * M_PI * s2 / beta);
      t += beta * ((loc + f) * (loc + f) - loc * loc) / (2.0 * s2);
    }
    terms.push_back(t);
  }
  return logsumexp(terms);
}

}  // namespace beam
