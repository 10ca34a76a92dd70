#include "beam/tds.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace beam {

void TdsConfig::validate() const {
  if (particles < 1) throw std::invalid_argument("tds: particles must be >= 1");
  if (!(phi >= 0.0) || !(phi < 1.0)) {
    throw std::invalid_argument("tds: phi must lie in [0, 1)");
  }
  if (!(var_beta >= 0.0) || !(var_beta < 1.0)) {
    throw std::invalid_argument("tds: var_beta must lie in [0, 1)");
  }
  if (steps_per_grad < 1) {
    throw std::invalid_argument("tds: steps_per_grad must be >= 1");
  }
}

double ParticlePopulation::mean_beta() const {
  double s = 0.0;
  for (const Particle& p : particles) s += p.beta;
  return particles.empty() ? 0.0 : s / static_cast<double>(particles.size());
}

std::vector<double> ParticlePopulation::visible_matrix() const {
  if (particles.empty()) return {};
  const std::size_t nv = particles[0].state.v.size();
  std::vector<double> rows(particles.size() * nv);
  for (std::size_t p = 0; p < particles.size(); ++p) {
    for (std::size_t i = 0; i < nv; ++i) {
      rows[p * nv + i] = particles[p].state.v[i];
    }
  }
  return rows;
}

std::vector<double> ParticlePopulation::hidden_matrix() const {
  if (particles.empty()) return {};
  const std::size_t nh = particles[0].state.h.size();
  std::vector<double> rows(particles.size() * nh);
  for (std::size_t p = 0; p < particles.size(); ++p) {
    for (std::size_t u = 0; u < nh; ++u) {
      rows[p * nh + u] = particles[p].state.h[u];
    }
  }
  return rows;
}

double gamma_step(double beta, double phi, double var_beta, RngStream& rng) {
  if (!std::isfinite(beta) || !(beta > 0.0)) {
    throw std::invalid_argument("gamma_step: beta must be finite and positive");
  }
  if (!(phi >= 0.0) || !(phi < 1.0)) {
    throw std::invalid_argument("gamma_step: phi must lie in [0, 1)");
  }
  if (!(var_beta > 0.0)) {
    throw std::invalid_argument("gamma_step: var_beta must be positive");
  }
  const double nu = 1.0 / var_beta;
  const double c = (1.0 - phi) * var_beta;
  const long long z = rng.poisson(beta * phi / c);
  return rng.gamma(nu + static_cast<double>(z), c);
}

ParticlePopulation init_population(const RbmModel& m, const TdsConfig& cfg,
                                   std::uint64_t seed) {
  cfg.validate();
  ParticlePopulation pop;
  pop.particles.resize(cfg.particles);
  for (int p = 0; p < cfg.particles; ++p) {
    Particle& pt = pop.particles[p];
    pt.state_rng =
        RngStream(seed, stream_id(Stream::particle_state, static_cast<std::uint32_t>(p)));
    pt.beta_rng =
        RngStream(seed, stream_id(Stream::particle_beta, static_cast<std::uint32_t>(p)));
    pt.state.v.resize(m.n_visible);
    pt.state.h.resize(m.n_hidden);
    for (int i = 0; i < m.n_visible; ++i) {
      if (m.visible_kind == LayerKind::bernoulli) {
        pt.state.v[i] = pt.state_rng.uniform() < 0.5 ? 1.0 : 0.0;
      } else {
        pt.state.v[i] = m.visible_loc[i] + pt.state_rng.normal();
      }
    }
    for (int u = 0; u < m.n_hidden; ++u) {
      pt.state.h[u] = pt.state_rng.uniform() < 0.5 ? 1.0 : 0.0;
    }
    pt.beta = cfg.var_beta > 0.0
                  ? pt.beta_rng.gamma(1.0 / cfg.var_beta, cfg.var_beta)
                  : 1.0;
  }
  return pop;
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
#pragma omp parallel for schedule(static)
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

}  // namespace beam
