#pragma once

#include "beam/critic.hpp"
#include "beam/divergences.hpp"
#include "beam/rbm.hpp"
#include "beam/tds.hpp"
#include "beam/training.hpp"

// Single-threaded twins of every OpenMP kernel. Each parallel kernel assigns
// one output element (row, particle, query, parameter) per iteration with no
// shared accumulators, so these serial versions must agree bit-for-bit at any
// thread count; the tests and the benchmark both lean on that.
namespace beam::ref {

void batch_hidden_means(const RbmModel& m, const double* rows, int n,
                        double* out);

GradientBundle mean_neg_energy_grad(const RbmModel& m, const double* v,
                                    const double* h, int n);

GradientBundle weighted_critic_covariance(const RbmModel& model,
                                          const double* v, const double* h,
                                          const double* t, const double* w,
                                          int n);

void advance(const RbmModel& m, const TdsConfig& cfg, ParticlePopulation& pop,
             int steps);

void critic_values(const CriticCache& cache, const double* queries, int n,
                   bool weighted, double* out);

double knn_kl_estimate(const double* x, int n, const double* y, int m, int dim);

}  // namespace beam::ref
