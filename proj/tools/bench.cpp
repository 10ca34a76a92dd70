// Times every OpenMP kernel against its serial twin and verifies that the
// two produce bit-identical results along the way. Exits nonzero on any
// mismatch, so the quick mode doubles as a smoke test.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "beam/critic.hpp"
#include "beam/divergences.hpp"
#include "beam/rbm.hpp"
#include "beam/reference.hpp"
#include "beam/rng.hpp"
#include "beam/tds.hpp"
#include "beam/training.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double best_ms(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = Clock::now();
    fn();
    auto t1 = Clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         (a.empty() ||
          std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

bool same_bundle(const beam::GradientBundle& a, const beam::GradientBundle& b) {
  return same_bits(a.visible_loc, b.visible_loc) &&
         same_bits(a.visible_log_scale, b.visible_log_scale) &&
         same_bits(a.hidden_bias, b.hidden_bias) && same_bits(a.weights, b.weights);
}

int failures = 0;

void report(const char* name, double serial_ms, double parallel_ms, bool ok) {
  std::printf("%-26s %10.3f ms %10.3f ms   x%-6.2f %s\n", name, serial_ms,
              parallel_ms, parallel_ms > 0 ? serial_ms / parallel_ms : 0.0,
              ok ? "bitwise-equal" : "MISMATCH");
  if (!ok) ++failures;
}

beam::RbmModel make_model(int nv, int nh, beam::LayerKind kind,
                          std::uint64_t seed) {
  beam::RbmModel m = beam::RbmModel::make(nv, nh, kind);
  beam::RngStream rng(seed, beam::stream_id(beam::Stream::model_init));
  for (double& w : m.weights) w = 0.05 * rng.normal();
  for (double& b : m.hidden_bias) b = 0.1 * rng.normal();
  for (double& l : m.visible_loc) l = 0.3 * rng.normal();
  if (kind == beam::LayerKind::gaussian) {
    for (double& s : m.visible_log_scale) s = 0.2 * rng.normal();
  }
  return m;
}

std::vector<double> random_rows(int n, int dim, double scale, beam::RngStream& rng) {
  std::vector<double> rows(static_cast<std::size_t>(n) * dim);
  for (double& x : rows) x = scale * rng.normal();
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--quick") quick = true;
  }
  const int reps = quick ? 1 : 3;
  const int nv = quick ? 64 : 784;
  const int nh = quick ? 16 : 64;
  const int rows = quick ? 32 : 256;
  const int particles = quick ? 16 : 100;
  const int sweeps = quick ? 5 : 50;
  const int cache_n = quick ? 100 : 500;
  const int kl_n = quick ? 200 : 1000;

#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp threads: (compiled without OpenMP)\n");
#endif

  beam::RngStream rng(7, beam::stream_id(beam::Stream::data_gen));
  const beam::RbmModel model = make_model(nv, nh, beam::LayerKind::gaussian, 7);
  const std::vector<double> v = random_rows(rows, nv, 1.0, rng);
  std::vector<double> h(static_cast<std::size_t>(rows) * nh);
  beam::batch_hidden_means(model, v.data(), rows, h.data());

  {
    std::vector<double> par(h.size()), ser(h.size());
    double pms = best_ms([&] { beam::batch_hidden_means(model, v.data(), rows, par.data()); }, reps);
    double sms = best_ms([&] { beam::ref::batch_hidden_means(model, v.data(), rows, ser.data()); }, reps);
    report("batch_hidden_means", sms, pms, same_bits(par, ser));
  }
  {
    beam::GradientBundle par, ser;
    double pms = best_ms([&] { par = beam::mean_neg_energy_grad(model, v.data(), h.data(), rows); }, reps);
    double sms = best_ms([&] { ser = beam::ref::mean_neg_energy_grad(model, v.data(), h.data(), rows); }, reps);
    report("mean_neg_energy_grad", sms, pms, same_bundle(par, ser));
  }
  {
    std::vector<double> t(rows), w(rows, 1.0 / rows);
    for (int r = 0; r < rows; ++r) t[r] = (r % 2 == 0) ? 0.5 : -0.5;
    beam::GradientBundle par, ser;
    double pms = best_ms([&] { par = beam::weighted_critic_covariance(model, v.data(), h.data(), t.data(), w.data(), rows); }, reps);
    double sms = best_ms([&] { ser = beam::ref::weighted_critic_covariance(model, v.data(), h.data(), t.data(), w.data(), rows); }, reps);
    report("weighted_critic_covariance", sms, pms, same_bundle(par, ser));
  }
  {
    beam::TdsConfig cfg;
    cfg.particles = particles;
    cfg.phi = 0.9;
    cfg.var_beta = 0.81;
    cfg.steps_per_grad = sweeps;
    beam::ParticlePopulation par = beam::init_population(model, cfg, 11);
    beam::ParticlePopulation ser = par;
    double pms = best_ms([&] { beam::advance(model, cfg, par, sweeps); }, 1);
    double sms = best_ms([&] { beam::ref::advance(model, cfg, ser, sweeps); }, 1);
    bool ok = par.size() == ser.size();
    for (int p = 0; ok && p < par.size(); ++p) {
      const beam::Particle& a = par.particles[p];
      const beam::Particle& b = ser.particles[p];
      ok = a.beta == b.beta && same_bits(a.state.v, b.state.v) &&
           same_bits(a.state.h, b.state.h) &&
           a.state_rng.state() == b.state_rng.state() &&
           a.beta_rng.state() == b.beta_rng.state();
    }
    report("advance", sms, pms, ok);
  }
  {
    const int dim = nh;
    std::vector<double> data_pts = random_rows(cache_n, dim, 1.0, rng);
    std::vector<double> model_pts = random_rows(cache_n, dim, 1.2, rng);
    std::vector<double> queries = random_rows(cache_n, dim, 1.1, rng);
    beam::CriticCache cache;
    cache.k = 5;
    cache.epsilon = 1e-3;
    beam::update_cache(cache, data_pts.data(), cache_n, model_pts.data(), cache_n, dim);
    std::vector<double> par(cache_n), ser(cache_n);
    double pms = best_ms([&] { beam::critic_values(cache, queries.data(), cache_n, true, par.data()); }, reps);
    double sms = best_ms([&] { beam::ref::critic_values(cache, queries.data(), cache_n, true, ser.data()); }, reps);
    report("critic_values", sms, pms, same_bits(par, ser));
  }
  {
    const int dim = 2;
    std::vector<double> xs = random_rows(kl_n, dim, 1.0, rng);
    std::vector<double> ys = random_rows(kl_n, dim, 1.3, rng);
    double par = 0, ser = 0;
    double pms = best_ms([&] { par = beam::knn_kl_estimate(xs.data(), kl_n, ys.data(), kl_n, dim); }, reps);
    double sms = best_ms([&] { ser = beam::ref::knn_kl_estimate(xs.data(), kl_n, ys.data(), kl_n, dim); }, reps);
    report("knn_kl_estimate", sms, pms, par == ser);
  }

  if (failures) {
    std::printf("%d kernel(s) disagreed with the serial reference\n", failures);
    return 1;
  }
  std::printf("all kernels bitwise-equal to the serial reference\n");
  return 0;
}
