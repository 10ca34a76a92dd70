#pragma once

#include <functional>

#include "beam/tds.hpp"

namespace beam {

struct DivergenceReport {
  int epoch = 0;
  double forward_kl = 0.0;  // KL(data || model)
  double reverse_kl = 0.0;  // KL(model || data)
  int n_minibatches_averaged = 0;
};

// 1-NN Kullback-Leibler estimator between sample sets X (n rows) and
// Y (m rows):
//
//   (dim / n) * sum_i log(nu_i / rho_i) + log(m / (n - 1))
//
// where rho_i is the distance from x_i to its nearest neighbor within X
// (excluding itself by index) and nu_i the distance to its nearest point of
// Y. Distances are floored at 1e-12 so duplicate points stay finite.
double knn_kl_estimate(const double* x, int n, const double* y, int m,
                       int dim);

// Forward and reverse KL between held-out validation rows and the current
// fantasy particles, averaged over consecutive validation minibatches.
DivergenceReport monitor(const double* validation, int n_validation,
                         const ParticlePopulation& population, int minibatch);

struct QuadratureGrid {
  double lo = 0.0;
  double hi = 0.0;
  int n = 1 << 14;
};

// Composite-midpoint integral of -q(x) log(2 p(x) / (p(x) + q(x))).
// Both densities must integrate to 1 on the grid to within 1e-6.
double discriminator_divergence_1d(const std::function<double(double)>& p,
                                   const std::function<double(double)>& q,
                                   const QuadratureGrid& grid);

// Composite-midpoint KL(p || q) on the same grid, for calibration against
// the sample-based estimator.
double kl_divergence_1d(const std::function<double(double)>& p,
                        const std::function<double(double)>& q,
                        const QuadratureGrid& grid);

}  // namespace beam
