#pragma once

// Shared oracles and fixtures for the test suites: exhaustive enumeration of
// small Bernoulli models, finite differences, a brute-force critic written
// independently of the production kernel, an exact Spearman trend test, IDX
// fixture writers, and subprocess plumbing for driving the CLI binary.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "beam/critic.hpp"
#include "beam/rbm.hpp"
#include "beam/rng.hpp"
#include "beam/textio.hpp"

namespace ts {

// ---- exhaustive enumeration of small Bernoulli RBMs -----------------------

// all (v, h) configurations, v-word major then h-word, bit i = unit i
inline std::vector<beam::State> all_states(int nv, int nh) {
  std::vector<beam::State> out;
  out.reserve(std::size_t{1} << (nv + nh));
  for (std::uint64_t vm = 0; vm < (std::uint64_t{1} << nv); ++vm) {
    for (std::uint64_t hm = 0; hm < (std::uint64_t{1} << nh); ++hm) {
      beam::State s;
      s.v.resize(nv);
      s.h.resize(nh);
      for (int i = 0; i < nv; ++i) s.v[i] = (vm >> i) & 1 ? 1.0 : 0.0;
      for (int u = 0; u < nh; ++u) s.h[u] = (hm >> u) & 1 ? 1.0 : 0.0;
      out.push_back(std::move(s));
    }
  }
  return out;
}

inline double logsumexp(const std::vector<double>& xs) {
  double mx = xs[0];
  for (double x : xs) mx = std::max(mx, x);
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

// p(v, h) = exp(-beta E) / Z(beta) over all_states order
inline std::vector<double> enum_probs(const beam::RbmModel& m,
                                      const std::vector<beam::State>& states,
                                      double beta = 1.0) {
  std::vector<double> le(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) {
    le[s] = -beta * beam::energy(m, states[s]);
  }
  const double lz = logsumexp(le);
  std::vector<double> p(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) p[s] = std::exp(le[s] - lz);
  return p;
}

// mean over rows of log p(v) for a Bernoulli model, fully enumerated
inline double enum_avg_loglik(const beam::RbmModel& m, const double* rows,
                              int n) {
  const auto states = all_states(m.n_visible, m.n_hidden);
  std::vector<double> le(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) {
    le[s] = -beam::energy(m, states[s]);
  }
  const double lz = logsumexp(le);
  double acc = 0.0;
  beam::State s;
  s.h.resize(m.n_hidden);
  for (int r = 0; r < n; ++r) {
    s.v.assign(rows + static_cast<std::size_t>(r) * m.n_visible,
               rows + static_cast<std::size_t>(r + 1) * m.n_visible);
    std::vector<double> terms;
    terms.reserve(std::size_t{1} << m.n_hidden);
    for (std::uint64_t hm = 0; hm < (std::uint64_t{1} << m.n_hidden); ++hm) {
      for (int u = 0; u < m.n_hidden; ++u) s.h[u] = (hm >> u) & 1 ? 1.0 : 0.0;
      terms.push_back(-beam::energy(m, s));
    }
    acc += logsumexp(terms) - lz;
  }
  return acc / n;
}

// exact model expectation of -dE/dtheta
inline beam::GradientBundle enum_expected_grad(const beam::RbmModel& m) {
  const auto states = all_states(m.n_visible, m.n_hidden);
  const auto p = enum_probs(m, states);
  beam::GradientBundle acc = beam::GradientBundle::zeros(m);
  for (std::size_t s = 0; s < states.size(); ++s) {
    acc.add_scaled(p[s], beam::neg_energy_grad(m, states[s]));
  }
  return acc;
}

// exact adversarial objective A = sum_s p(s) T(h_s)
inline double enum_adv_objective(
    const beam::RbmModel& m,
    const std::function<double(const std::vector<double>&)>& critic) {
  const auto states = all_states(m.n_visible, m.n_hidden);
  const auto p = enum_probs(m, states);
  double a = 0.0;
  for (std::size_t s = 0; s < states.size(); ++s) a += p[s] * critic(states[s].h);
  return a;
}

// exact Cov_p[T, -dE/dtheta], accumulated directly from the definition
inline beam::GradientBundle enum_critic_cov(
    const beam::RbmModel& m,
    const std::function<double(const std::vector<double>&)>& critic) {
  const auto states = all_states(m.n_visible, m.n_hidden);
  const auto p = enum_probs(m, states);
  beam::GradientBundle e_g = beam::GradientBundle::zeros(m);
  beam::GradientBundle e_tg = beam::GradientBundle::zeros(m);
  double e_t = 0.0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    const double t = critic(states[s].h);
    const beam::GradientBundle g = beam::neg_energy_grad(m, states[s]);
    e_g.add_scaled(p[s], g);
    e_tg.add_scaled(p[s] * t, g);
    e_t += p[s] * t;
  }
  e_tg.add_scaled(-e_t, e_g);
  return e_tg;
}

// ---- finite differences over every trainable parameter --------------------

inline std::vector<double*> param_refs(beam::RbmModel& m) {
  std::vector<double*> refs;
  for (double& x : m.visible_loc) refs.push_back(&x);
  if (m.visible_kind == beam::LayerKind::gaussian) {
    for (double& x : m.visible_log_scale) refs.push_back(&x);
  }
  for (double& x : m.hidden_bias) refs.push_back(&x);
  for (double& x : m.weights) refs.push_back(&x);
  return refs;
}

inline std::vector<double> bundle_flat(const beam::RbmModel& m,
                                       const beam::GradientBundle& g) {
  std::vector<double> flat;
  for (double x : g.visible_loc) flat.push_back(x);
  if (m.visible_kind == beam::LayerKind::gaussian) {
    for (double x : g.visible_log_scale) flat.push_back(x);
  }
  for (double x : g.hidden_bias) flat.push_back(x);
  for (double x : g.weights) flat.push_back(x);
  return flat;
}

// central difference of a scalar objective, one entry per trainable parameter
inline std::vector<double> fd_grad(
    const beam::RbmModel& model,
    const std::function<double(const beam::RbmModel&)>& objective,
    double step = 1e-5) {
  beam::RbmModel work = model;
  auto refs = param_refs(work);
  std::vector<double> g(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const double saved = *refs[i];
    *refs[i] = saved + step;
    const double hi = objective(work);
    *refs[i] = saved - step;
    const double lo = objective(work);
    *refs[i] = saved;
    g[i] = (hi - lo) / (2.0 * step);
  }
  return g;
}

// max |a - b| scaled by the larger bundle's sup norm (with a floor so
// all-zero oracles do not divide by zero)
inline double rel_err(const std::vector<double>& a,
                      const std::vector<double>& b) {
  double scale = 1e-6;
  for (double x : b) scale = std::max(scale, std::abs(x));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst / scale;
}

// ---- misc numeric helpers --------------------------------------------------

inline bool bits_equal(double a, double b) {
  std::uint64_t ua, ub;
  std::memcpy(&ua, &a, 8);
  std::memcpy(&ub, &b, 8);
  return ua == ub;
}

inline bool bits_equal(const std::vector<double>& a,
                       const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!bits_equal(a[i], b[i])) return false;
  }
  return true;
}

inline double tv_distance(const std::vector<long long>& counts,
                          const std::vector<double>& probs) {
  long long n = 0;
  for (long long c : counts) n += c;
  double tv = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    tv += std::abs(static_cast<double>(counts[i]) / n - probs[i]);
  }
  return 0.5 * tv;
}

// parameters ~ U(-scale, scale); Gaussian log-scales ~ U(-0.3, 0.3)
inline beam::RbmModel random_model(int nv, int nh, beam::LayerKind kind,
                                   std::uint64_t seed, double scale = 1.0) {
  beam::RbmModel m = beam::RbmModel::make(nv, nh, kind);
  beam::RngStream rng(seed, 0xfeed);
  auto u = [&](double s) { return s * (2.0 * rng.uniform() - 1.0); };
  for (double& x : m.visible_loc) x = u(scale);
  if (kind == beam::LayerKind::gaussian) {
    for (double& x : m.visible_log_scale) x = u(0.3);
  }
  for (double& x : m.hidden_bias) x = u(scale);
  for (double& x : m.weights) x = u(scale);
  return m;
}

// ---- brute-force critic (independent of the production selection) ---------

struct BruteNeighbor {
  double d2 = 0.0;
  int side = 0;  // 0 = data, 1 = model
  int idx = 0;
};

inline double brute_critic(const beam::CriticCache& cache, const double* x,
                           bool weighted,
                           beam::CacheSide exclude = beam::CacheSide::none,
                           int exclude_idx = -1) {
  std::vector<BruteNeighbor> all;
  auto add_block = [&](const std::vector<double>& cols, int n, int side) {
    for (int j = 0; j < n; ++j) {
      if ((side == 0 && exclude == beam::CacheSide::data && j == exclude_idx) ||
          (side == 1 && exclude == beam::CacheSide::model && j == exclude_idx)) {
        continue;
      }
      double d2 = 0.0;
      for (int d = 0; d < cache.dim; ++d) {
        const double t = cols[static_cast<std::size_t>(d) * n + j] - x[d];
        d2 += t * t;
      }
      all.push_back({d2, side, j});
    }
  };
  add_block(cache.data_cols, cache.n_data, 0);
  add_block(cache.model_cols, cache.n_model, 1);
  std::sort(all.begin(), all.end(),
            [](const BruteNeighbor& a, const BruteNeighbor& b) {
              if (a.d2 != b.d2) return a.d2 < b.d2;
              if (a.side != b.side) return a.side < b.side;
              return a.idx < b.idx;
            });
  if (cache.k < 1 || cache.k > static_cast<int>(all.size())) {
    throw std::invalid_argument("brute_critic: bad k");
  }
  double t;
  if (weighted) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < cache.k; ++i) {
      const double w = 1.0 / (std::sqrt(all[i].d2) + cache.epsilon);
      den += w;
      if (all[i].side == 0) num += w;
    }
    t = 2.0 * num / den - 1.0;
  } else {
    int votes = 0;
    for (int i = 0; i < cache.k; ++i) {
      if (all[i].side == 0) ++votes;
    }
    t = 2.0 * static_cast<double>(votes) / static_cast<double>(cache.k) - 1.0;
  }
  return std::clamp(t, -1.0, 1.0);
}

// ---- exact Spearman trend test ---------------------------------------------

// ranks 0..n-1; ties would need midranks, which these continuous metrics
// never produce, so they are rejected outright
inline std::vector<int> ranks_of(const std::vector<double>& xs) {
  const int n = static_cast<int>(xs.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return xs[a] < xs[b]; });
  for (int i = 1; i < n; ++i) {
    if (xs[order[i]] == xs[order[i - 1]]) {
      throw std::invalid_argument("spearman: tied values");
    }
  }
  std::vector<int> rank(n);
  for (int i = 0; i < n; ++i) rank[order[i]] = i;
  return rank;
}

inline long long spearman_d2(const std::vector<double>& xs) {
  const auto rank = ranks_of(xs);
  long long d2 = 0;
  for (std::size_t i = 0; i < rank.size(); ++i) {
    const long long d = rank[i] - static_cast<long long>(i);
    d2 += d * d;
  }
  return d2;
}

// rho against the time index 0..n-1
inline double spearman_rho(const std::vector<double>& xs) {
  const long long n = static_cast<long long>(xs.size());
  return 1.0 - 6.0 * static_cast<double>(spearman_d2(xs)) /
                   static_cast<double>(n * (n * n - 1));
}

// exact permutation null of sum d^2 for small n, memoized
inline const std::vector<long long>& spearman_null_counts(int n) {
  static std::map<int, std::vector<long long>> memo;
  auto it = memo.find(n);
  if (it != memo.end()) return it->second;
  if (n < 2 || n > 10) throw std::invalid_argument("spearman: n must be 2..10");
  std::vector<long long> counts(static_cast<std::size_t>(n * (n * n - 1) / 3) + 1,
                                0);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    long long d2 = 0;
    for (int i = 0; i < n; ++i) {
      const long long d = perm[i] - static_cast<long long>(i);
      d2 += d * d;
    }
    ++counts[static_cast<std::size_t>(d2)];
  } while (std::next_permutation(perm.begin(), perm.end()));
  return memo.emplace(n, std::move(counts)).first->second;
}

// one-sided exact p-value for an increasing (positive = true) or decreasing
// trend of xs over its index
inline double spearman_p(const std::vector<double>& xs, bool positive) {
  const int n = static_cast<int>(xs.size());
  const long long d2 = spearman_d2(xs);
  const auto& counts = spearman_null_counts(n);
  long long total = 0, tail = 0;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    total += counts[s];
    // small sum d^2 <-> large rho; increasing trend is the low-d2 tail
    const bool in_tail = positive ? static_cast<long long>(s) <= d2
                                  : static_cast<long long>(s) >= d2;
    if (in_tail) tail += counts[s];
  }
  return static_cast<double>(tail) / static_cast<double>(total);
}

// ---- IDX fixtures ----------------------------------------------------------

inline void write_be32(std::ostream& out, std::uint32_t x) {
  unsigned char b[4] = {static_cast<unsigned char>(x >> 24),
                        static_cast<unsigned char>(x >> 16),
                        static_cast<unsigned char>(x >> 8),
                        static_cast<unsigned char>(x)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_idx_images(const std::string& path,
                             const std::vector<std::vector<std::uint8_t>>& imgs,
                             int rows = 28, int cols = 28,
                             std::uint32_t magic = 0x00000803u) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_idx_images: cannot open " + path);
  write_be32(out, magic);
  write_be32(out, static_cast<std::uint32_t>(imgs.size()));
  write_be32(out, static_cast<std::uint32_t>(rows));
  write_be32(out, static_cast<std::uint32_t>(cols));
  for (const auto& img : imgs) {
    out.write(reinterpret_cast<const char*>(img.data()),
              static_cast<std::streamsize>(img.size()));
  }
}

inline void write_idx_labels(const std::string& path,
                             const std::vector<std::uint8_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_idx_labels: cannot open " + path);
  write_be32(out, 0x00000801u);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

// Synthetic 28x28 corpus: ten soft multi-blob prototypes with per-image
// amplitude jitter, small integer translations, and pixel noise, quantized to
// bytes. The jitter gives each class enough within-class variation that a
// model has to keep refining for many epochs, standing in for handwritten
// digits wherever the tests need an image corpus with clustered structure.
inline std::vector<std::vector<std::uint8_t>> blob_corpus(int n,
                                                          std::uint64_t seed,
                                                          double noise = 0.05) {
  beam::RngStream rng(seed, 0xb10b);
  std::vector<std::vector<double>> protos;
  for (int p = 0; p < 10; ++p) {
    std::vector<double> img(784, 0.0);
    const int blobs = 3 + static_cast<int>(rng.uniform() * 3.0);
    for (int b = 0; b < blobs; ++b) {
      const double cx = 6.0 + 16.0 * rng.uniform();
      const double cy = 6.0 + 16.0 * rng.uniform();
      const double s = 1.5 + 2.0 * rng.uniform();
      const double amp = 0.6 + 0.4 * rng.uniform();
      for (int y = 0; y < 28; ++y) {
        for (int x = 0; x < 28; ++x) {
          const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
          img[y * 28 + x] += amp * std::exp(-d2 / (2.0 * s * s));
        }
      }
    }
    for (double& v : img) v = std::min(v, 1.0);
    protos.push_back(std::move(img));
  }
  std::vector<std::vector<std::uint8_t>> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto& proto = protos[i % 10];
    const double gain = 0.75 + 0.3 * rng.uniform();
    const int dx = static_cast<int>(rng.uniform() * 5.0) - 2;
    const int dy = static_cast<int>(rng.uniform() * 5.0) - 2;
    std::vector<std::uint8_t> img(784);
    for (int y = 0; y < 28; ++y) {
      for (int x = 0; x < 28; ++x) {
        const int sx = x - dx, sy = y - dy;
        const double base = (sx >= 0 && sx < 28 && sy >= 0 && sy < 28)
                                ? gain * proto[sy * 28 + sx]
                                : 0.0;
        const double v = std::clamp(base + noise * rng.normal(), 0.0, 1.0);
        img[y * 28 + x] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

// ---- files, subprocesses, metrics ------------------------------------------

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("slurp: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::filesystem::create_directories(
      std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::filesystem::path fresh_dir(const std::string& tag) {
  static int counter = 0;
  const auto root = std::filesystem::temp_directory_path() / "beam_tests";
  auto dir = root / (tag + "_" + std::to_string(::getpid()) + "_" +
                     std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// runs through the shell, captures stdout+stderr into log_path, returns the
// exit code
inline int run_cmd(const std::string& cmd, const std::string& log_path) {
  const std::string full = cmd + " >" + log_path + " 2>&1";
  const int rc = std::system(full.c_str());
  if (rc == -1) throw std::runtime_error("run_cmd: system() failed");
  if (WIFEXITED(rc)) return WEXITSTATUS(rc);
  return 128;
}

struct MetricsRow {
  int epoch = 0;
  std::string phase;
  double forward_kl = 0.0;
  double reverse_kl = 0.0;
  double mean_beta = 0.0;
  double learning_rate = 0.0;
};

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::vector<MetricsRow> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_metrics: cannot open " + path);
  std::vector<MetricsRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("epoch,", 0) == 0) continue;
    const auto f = split_csv(line);
    if (f.size() != 6) throw std::runtime_error("read_metrics: bad row " + line);
    MetricsRow r;
    r.epoch = static_cast<int>(beam::parse_int(f[0], "epoch"));
    r.phase = f[1];
    r.forward_kl = beam::parse_double(f[2], "forward_kl");
    r.reverse_kl = beam::parse_double(f[3], "reverse_kl");
    r.mean_beta = beam::parse_double(f[4], "mean_beta");
    r.learning_rate = beam::parse_double(f[5], "learning_rate");
    rows.push_back(r);
  }
  return rows;
}

// samples csv: "# beam samples v1 dim=D n=N" then one row per particle
inline std::vector<std::vector<double>> read_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_samples: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_csv(line);
    std::vector<double> row;
    row.reserve(f.size());
    for (const auto& s : f) row.push_back(beam::parse_double(s, "sample"));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ts
