#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <vector>

#include "beam/divergences.hpp"
#include "beam/rng.hpp"
#include "beam/tds.hpp"
#include "support.hpp"

using namespace beam;

namespace {

double gauss_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
}

// closed form for KL(N(mu1, s1^2) || N(mu2, s2^2))
double gauss_kl(double mu1, double s1, double mu2, double s2) {
  const double r = s1 / s2;
  const double d = mu1 - mu2;
  return std::log(s2 / s1) + 0.5 * (r * r + d * d / (s2 * s2) - 1.0);
}

struct Fig2 {
  // equal-weight unit-variance modes at +-delta/2 vs the moment-matched normal
  std::function<double(double)> p, q;
  QuadratureGrid grid;
  explicit Fig2(double delta) {
    const double sq = std::sqrt(1.0 + 0.25 * delta * delta);
    p = [delta](double x) {
      return 0.5 * gauss_pdf(x, -0.5 * delta, 1.0) +
             0.5 * gauss_pdf(x, 0.5 * delta, 1.0);
    };
    q = [sq](double x) { return gauss_pdf(x, 0.0, sq); };
    const double half = 0.5 * delta + 8.0 * std::max(1.0, sq);
    grid = QuadratureGrid{-half, half, 1 << 14};
  }
};

}  // namespace

TEST_CASE("knn_kl_estimate reproduces tiny fixtures exactly") {
  const double x1[2] = {0.0, 1.0};
  const double y1[1] = {3.0};
  // terms log(3/1) + log(2/1), prefactor 1/2, tail log(1/1)
  CHECK(knn_kl_estimate(x1, 2, y1, 1, 1) ==
        doctest::Approx(0.5 * std::log(6.0)).epsilon(1e-15));

  const double x2[3] = {0.0, 2.0, 5.0};
  const double y2[2] = {1.0, 9.0};
  // terms log(1/2), log(1/2), log(4/3); tail log(2/2)
  CHECK(knn_kl_estimate(x2, 3, y2, 2, 1) ==
        doctest::Approx(-std::log(3.0) / 3.0).epsilon(1e-13));

  // coincident rows hit the distance floor but stay finite
  const double xdup[3] = {0.0, 0.0, 1.0};
  CHECK(std::isfinite(knn_kl_estimate(xdup, 3, y1, 1, 1)));

  CHECK_THROWS_AS(knn_kl_estimate(x1, 1, y1, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(knn_kl_estimate(x1, 2, y1, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(knn_kl_estimate(x1, 2, y1, 1, 0), std::invalid_argument);
}

TEST_CASE("knn_kl_estimate converges to Gaussian ground truth") {
  const int n = 5000;
  RngStream rng(11, 0xd1);
  std::vector<double> std1(n), std2(n), shifted(n), wide(n);
  for (int i = 0; i < n; ++i) {
    std1[i] = rng.normal();
    std2[i] = rng.normal();
    shifted[i] = 1.0 + rng.normal();
    wide[i] = 2.0 * rng.normal();
  }

  // identical distributions
  CHECK(std::abs(knn_kl_estimate(std1.data(), n, std2.data(), n, 1)) < 0.05);

  // KL(N(0,1) || N(1,1)) = 1/2
  CHECK(knn_kl_estimate(std1.data(), n, shifted.data(), n, 1) ==
        doctest::Approx(0.5).epsilon(0.15));

  // the estimator is asymmetric: against N(0, 4) the two directions differ
  const double fwd = knn_kl_estimate(std1.data(), n, wide.data(), n, 1);
  const double rev = knn_kl_estimate(wide.data(), n, std2.data(), n, 1);
  CHECK(fwd == doctest::Approx(gauss_kl(0, 1, 0, 2)).epsilon(0.35));
  CHECK(rev == doctest::Approx(gauss_kl(0, 2, 0, 1)).epsilon(0.15));
  CHECK(std::abs(fwd - gauss_kl(0, 1, 0, 2)) < 0.1);
  CHECK(std::abs(rev - gauss_kl(0, 2, 0, 1)) < 0.2);
  CHECK(rev > fwd);
}

TEST_CASE("knn_kl_estimate error shrinks with sample size") {
  const double truth = 0.5;  // KL(N(0,1) || N(1,1))
  double err_small = 0.0, err_big = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (int n : {1000, 10000}) {
      RngStream rng(seed, 0xd2);
      std::vector<double> xs(n), ys(n);
      for (int i = 0; i < n; ++i) xs[i] = rng.normal();
      for (int i = 0; i < n; ++i) ys[i] = 1.0 + rng.normal();
      const double e =
          std::abs(knn_kl_estimate(xs.data(), n, ys.data(), n, 1) - truth);
      (n == 1000 ? err_small : err_big) += e;
    }
  }
  CHECK(err_big < err_small);
}

TEST_CASE("monitor averages block estimates and matches direct calls") {
  RbmModel m = ts::random_model(2, 1, LayerKind::gaussian, 21);
  TdsConfig cfg;
  cfg.particles = 64;
  cfg.var_beta = 0.0;
  ParticlePopulation pop = init_population(m, cfg, 5);
  RngStream rng(5, 0xd3);
  for (auto& p : pop.particles) {
    p.state.v[0] = rng.normal();
    p.state.v[1] = rng.normal();
  }
  const int n_val = 256;
  std::vector<double> validation(n_val * 2);
  for (double& v : validation) v = rng.normal();

  DivergenceReport rep = monitor(validation.data(), n_val, pop, 64);
  CHECK(rep.n_minibatches_averaged == 4);

  const std::vector<double> fantasy = pop.visible_matrix();
  double fwd = 0.0, rev = 0.0;
  for (int b = 0; b < 4; ++b) {
    const double* rows = validation.data() + b * 64 * 2;
    fwd += knn_kl_estimate(rows, 64, fantasy.data(), 64, 2);
    rev += knn_kl_estimate(fantasy.data(), 64, rows, 64, 2);
  }
  CHECK(ts::bits_equal(rep.forward_kl, fwd / 4.0));
  CHECK(ts::bits_equal(rep.reverse_kl, rev / 4.0));

  // same distribution on both sides: both directions near zero
  CHECK(std::abs(rep.forward_kl) < 0.3);
  CHECK(std::abs(rep.reverse_kl) < 0.3);

  // a single ragged block falls back to one estimate over the leading rows
  DivergenceReport one = monitor(validation.data(), 100, pop, 64);
  CHECK(one.n_minibatches_averaged == 1);
  CHECK(ts::bits_equal(
      one.forward_kl,
      knn_kl_estimate(validation.data(), 64, fantasy.data(), 64, 2)));

  CHECK_THROWS_AS(monitor(validation.data(), 1, pop, 64),
                  std::invalid_argument);
  CHECK_THROWS_AS(monitor(validation.data(), n_val, pop, 1),
                  std::invalid_argument);
  ParticlePopulation tiny;
  tiny.particles.assign(pop.particles.begin(), pop.particles.begin() + 1);
  CHECK_THROWS_AS(monitor(validation.data(), n_val, tiny, 64),
                  std::invalid_argument);
}

TEST_CASE("quadrature divergences recover closed forms") {
  QuadratureGrid grid{-24.0, 24.0, 1 << 14};
  auto std_normal = [](double x) { return gauss_pdf(x, 0.0, 1.0); };
  auto shifted = [](double x) { return gauss_pdf(x, 1.0, 1.0); };
  auto wide = [](double x) { return gauss_pdf(x, 1.0, 2.0); };

  CHECK(kl_divergence_1d(std_normal, shifted, grid) ==
        doctest::Approx(0.5).epsilon(1e-9));
  CHECK(kl_divergence_1d(std_normal, wide, grid) ==
        doctest::Approx(gauss_kl(0, 1, 1, 2)).epsilon(1e-9));

  // identical integrands make the discriminator integrand vanish exactly
  CHECK(discriminator_divergence_1d(std_normal, std_normal, grid) == 0.0);

  // an unnormalized density is rejected, as is a degenerate grid
  auto doubled = [](double x) { return 2.0 * gauss_pdf(x, 0.0, 1.0); };
  CHECK_THROWS_AS(discriminator_divergence_1d(doubled, std_normal, grid),
                  std::invalid_argument);
  CHECK_THROWS_AS(kl_divergence_1d(std_normal, doubled, grid),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      discriminator_divergence_1d(std_normal, std_normal,
                                  QuadratureGrid{1.0, -1.0, 1 << 14}),
      std::invalid_argument);
  CHECK_THROWS_AS(discriminator_divergence_1d(std_normal, std_normal,
                                              QuadratureGrid{-1.0, 1.0, 1}),
                  std::invalid_argument);
}

TEST_CASE("discriminator divergence on the bimodal family") {
  // pinned reference values for the separation sweep
  {
    Fig2 f(1.0);
    CHECK(discriminator_divergence_1d(f.p, f.q, f.grid) ==
          doctest::Approx(0.00011877).epsilon(1e-3));
    CHECK(kl_divergence_1d(f.p, f.q, f.grid) ==
          doctest::Approx(0.00015029).epsilon(1e-3));
  }
  {
    Fig2 f(3.0);
    CHECK(discriminator_divergence_1d(f.p, f.q, f.grid) ==
          doctest::Approx(0.06398524).epsilon(1e-3));
    CHECK(kl_divergence_1d(f.p, f.q, f.grid) ==
          doctest::Approx(0.06255019).epsilon(1e-3));
  }

  double dd0 = 0.0, dd6 = 0.0, kf0 = 0.0, kf6 = 0.0;
  for (double delta : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0}) {
    CAPTURE(delta);
    Fig2 f(delta);
    const double dd = discriminator_divergence_1d(f.p, f.q, f.grid);
    const double kf = kl_divergence_1d(f.p, f.q, f.grid);
    const double kr = kl_divergence_1d(f.q, f.p, f.grid);
    CHECK(dd >= -1e-12);  // f-divergences are nonnegative
    // sandwiched by reverse KL: KL(q||p) - log 2 <= D_D <= KL(q||p)
    CHECK(std::log(2.0) + dd >= kr - 1e-12);
    CHECK(dd <= kr + 1e-12);
    if (delta >= 0.5) CHECK(kr > kf);  // mode collapse penalized harder
    if (delta == 0.0) {
      dd0 = dd;
      kf0 = kf;
      CHECK(std::abs(dd) < 1e-10);
      CHECK(std::abs(kf) < 1e-10);
    }
    if (delta == 6.0) {
      dd6 = dd;
      kf6 = kf;
    }
  }
  // the discriminator term grows faster across the sweep than forward KL
  CHECK(dd6 - dd0 > kf6 - kf0);
  CHECK(dd6 - dd0 > 0.8);
}
