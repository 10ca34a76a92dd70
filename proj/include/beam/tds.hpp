#pragma once

#include <cstdint>
#include <vector>

#include "beam/rbm.hpp"
#include "beam/rng.hpp"

namespace beam {

struct TdsConfig {
  int particles = 100;      // population size m
  double phi = 0.9;         // autocorrelation of each beta chain
  double var_beta = 0.81;   // stationary variance of beta; 0 pins beta = 1
  int steps_per_grad = 100; // sweeps between gradient evaluations

  void validate() const;  // throws std::invalid_argument
};

struct Particle {
  State state;
  double beta = 1.0;
  RngStream state_rng;  // gibbs draws
  RngStream beta_rng;   // beta-chain draws
};

struct ParticlePopulation {
  std::vector<Particle> particles;

  int size() const { return static_cast<int>(particles.size()); }
  double mean_beta() const;
  // row-major copies of the particle layers, for kernels that want matrices
  std::vector<double> visible_matrix() const;
  std::vector<double> hidden_matrix() const;
};

// One move of the autocorrelated Gamma chain with stationary mean 1,
// stationary variance var_beta and autocorrelation phi:
//   z ~ Poisson(beta * phi / c),  beta' ~ Gamma(shape = 1/var_beta + z, scale = c)
// with c = (1 - phi) * var_beta. Requires var_beta > 0.
double gamma_step(double beta, double phi, double var_beta, RngStream& rng);

// m particles with independent substreams derived from seed; Bernoulli units
// start as fair coins, Gaussian visibles as unit normals around visible_loc,
// beta from its stationary Gamma law (or exactly 1 when var_beta = 0).
ParticlePopulation init_population(const RbmModel& m, const TdsConfig& cfg,
                                   std::uint64_t seed);

// steps rounds over every particle; each round refreshes beta first (skipped
// entirely when var_beta = 0) and then applies one Gibbs sweep. All particles
// advance independently, so the loop parallelizes without changing results.
void advance(const RbmModel& m, const TdsConfig& cfg, ParticlePopulation& pop,
             int steps);

}  // namespace beam
