#include "beam/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace beam {

namespace {

constexpr double kDistanceFloor = 1e-12;

double dist(const double* a, const double* b, int dim) {
  double d2 = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double t = a[d] - b[d];
    d2 += t * t;
  }
  return std::sqrt(d2);
}

}  // namespace

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
#pragma omp parallel for schedule(static)
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

DivergenceReport monitor(const double* validation, int n_validation,
                         const ParticlePopulation& population, int minibatch) {
  if (n_validation < 2) {
    throw std::invalid_argument("monitor: need at least 2 validation rows");
  }
  if (minibatch < 2) {
    throw std::invalid_argument("monitor: minibatch must be >= 2");
  }
  if (population.size() < 2) {
    throw std::invalid_argument("monitor: need at least 2 fantasy particles");
  }
  const int dim = static_cast<int>(population.particles[0].state.v.size());
  const std::vector<double> fantasy = population.visible_matrix();
  const int n_fantasy = population.size();

  int block = std::min(minibatch, n_validation);
  int n_blocks = std::max(1, n_validation / block);
  DivergenceReport rep;
  for (int b = 0; b < n_blocks; ++b) {
    const double* rows = validation + static_cast<std::size_t>(b) * block * dim;
    rep.forward_kl += knn_kl_estimate(rows, block, fantasy.data(), n_fantasy, dim);
    rep.reverse_kl += knn_kl_estimate(fantasy.data(), n_fantasy, rows, block, dim);
  }
  rep.forward_kl /= n_blocks;
  rep.reverse_kl /= n_blocks;
  rep.n_minibatches_averaged = n_blocks;
  return rep;
}

namespace {

void check_normalized(const char* name, double mass) {
  if (std::abs(mass - 1.0) > 1e-6) {
    throw std::invalid_argument(std::string("quadrature: density ") + name +
                                " integrates to " + std::to_string(mass) +
                                " on the grid, expected 1");
  }
}

}  // namespace

double discriminator_divergence_1d(const std::function<double(double)>& p,
                                   const std::function<double(double)>& q,
                                   const QuadratureGrid& grid) {
  if (grid.n < 2 || !(grid.hi > grid.lo)) {
    throw std::invalid_argument("quadrature: bad grid");
  }
  const double h = (grid.hi - grid.lo) / grid.n;
  double mass_p = 0.0, mass_q = 0.0, acc = 0.0;
  for (int j = 0; j < grid.n; ++j) {
    const double x = grid.lo + (j + 0.5) * h;
    const double px = p(x);
    const double qx = q(x);
    mass_p += px * h;
    mass_q += qx * h;
    if (qx > 0.0) acc -= qx * std::log(2.0 * px / (px + qx)) * h;
  }
  check_normalized("p", mass_p);
  check_normalized("q", mass_q);
  return acc;
}

double kl_divergence_1d(const std::function<double(double)>& p,
                        const std::function<double(double)>& q,
                        const QuadratureGrid& grid) {
  if (grid.n < 2 || !(grid.hi > grid.lo)) {
    throw std::invalid_argument("quadrature: bad grid");
  }
  const double h = (grid.hi - grid.lo) / grid.n;
  double mass_p = 0.0, mass_q = 0.0, acc = 0.0;
  for (int j = 0; j < grid.n; ++j) {
    const double x = grid.lo + (j + 0.5) * h;
    const double px = p(x);
    const double qx = q(x);
    mass_p += px * h;
    mass_q += qx * h;
    if (px > 0.0) acc += px * std::log(px / qx) * h;
  }
  check_normalized("p", mass_p);
  check_normalized("q", mass_q);
  return acc;
}

}  // namespace beam
