#include "beam/critic.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace beam {

namespace {

// squared distance from x to every point of a coordinate-major block;
// accumulated coordinate by coordinate so the inner loop is independent
// per point
void dist2_to_cols(const double* cols, int n, int dim, const double* x,
                   double* out) {
  for (int j = 0; j < n; ++j) out[j] = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double xd = x[d];
    const double* col = cols + static_cast<std::size_t>(d) * n;
    for (int j = 0; j < n; ++j) {
      const double t = col[j] - xd;
      out[j] += t * t;
    }
  }
}

struct Neighbor {
  double d2;
  int side;  // 0 = data, 1 = model
  int idx;
};

bool closer(const Neighbor& a, const Neighbor& b) {
  if (a.d2 != b.d2) return a.d2 < b.d2;
  if (a.side != b.side) return a.side < b.side;
  return a.idx < b.idx;
}

// k nearest cache points by (distance, side, index), optionally skipping one
// cache member identified by position rather than coordinates
int select_neighbors(const CriticCache& cache, const double* x,
                     CacheSide exclude, int exclude_idx, Neighbor* best,
                     std::vector<double>& scratch) {
  const int total = cache.n_data + cache.n_model -
                    (exclude == CacheSide::none ? 0 : 1);
  if (cache.k < 1 || cache.k > total) {
    throw std::invalid_argument(
        "critic: k must lie in [1, number of usable cache points]");
  }
  scratch.resize(static_cast<std::size_t>(std::max(cache.n_data, cache.n_model)));
  int count = 0;
  auto offer = [&](double d2, int side, int idx) {
    Neighbor cand{d2, side, idx};
    if (count == cache.k && !closer(cand, best[count - 1])) return;
    int pos = count < cache.k ? count : cache.k - 1;
    while (pos > 0 && closer(cand, best[pos - 1])) {
      best[pos] = best[pos - 1];
      --pos;
    }
    best[pos] = cand;
    if (count < cache.k) ++count;
  };
  dist2_to_cols(cache.data_cols.data(), cache.n_data, cache.dim, x,
                scratch.data());
  for (int j = 0; j < cache.n_data; ++j) {
    if (exclude == CacheSide::data && j == exclude_idx) continue;
    offer(scratch[j], 0, j);
  }
  dist2_to_cols(cache.model_cols.data(), cache.n_model, cache.dim, x,
                scratch.data());
  for (int j = 0; j < cache.n_model; ++j) {
    if (exclude == CacheSide::model && j == exclude_idx) continue;
    offer(scratch[j], 1, j);
  }
  return count;
}

double vote_value(const Neighbor* best, int k) {
  int data_votes = 0;
  for (int i = 0; i < k; ++i) {
    if (best[i].side == 0) ++data_votes;
  }
  double t = 2.0 * static_cast<double>(data_votes) / static_cast<double>(k) - 1.0;
  return std::clamp(t, -1.0, 1.0);
}

double weighted_value(const Neighbor* best, int k, double epsilon) {
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < k; ++i) {
    const double w = 1.0 / (std::sqrt(best[i].d2) + epsilon);
    den += w;
    if (best[i].side == 0) num += w;
  }
  double t = 2.0 * num / den - 1.0;
  return std::clamp(t, -1.0, 1.0);
}

double query_one(const CriticCache& cache, const double* x, CacheSide exclude,
                 int exclude_idx, bool weighted) {
  if (cache.empty()) {
    throw std::invalid_argument("critic: cache is empty");
  }
  std::vector<Neighbor> best(static_cast<std::size_t>(cache.k));
  std::vector<double> scratch;
  int k = select_neighbors(cache, x, exclude, exclude_idx, best.data(), scratch);
  return weighted ? weighted_value(best.data(), k, cache.epsilon)
                  : vote_value(best.data(), k);
}

}  // namespace

std::vector<double> CriticCache::data_row(int j) const {
  std::vector<double> row(dim);
  for (int d = 0; d < dim; ++d) {
    row[d] = data_cols[static_cast<std::size_t>(d) * n_data + j];
  }
  return row;
}

std::vector<double> CriticCache::model_row(int j) const {
  std::vector<double> row(dim);
  for (int d = 0; d < dim; ++d) {
    row[d] = model_cols[static_cast<std::size_t>(d) * n_model + j];
  }
  return row;
}

void update_cache(CriticCache& cache, const double* data_rows, int n_data,
                  const double* model_rows, int n_model, int dim) {
  if (dim < 1) throw std::invalid_argument("update_cache: dim must be >= 1");
  if (n_data < 1 || n_model < 1) {
    throw std::invalid_argument("update_cache: both point sets must be non-empty");
  }
  cache.dim = dim;
  cache.n_data = n_data;
  cache.n_model = n_model;
  cache.data_cols.assign(static_cast<std::size_t>(dim) * n_data, 0.0);
  cache.model_cols.assign(static_cast<std::size_t>(dim) * n_model, 0.0);
  for (int j = 0; j < n_data; ++j) {
    for (int d = 0; d < dim; ++d) {
      cache.data_cols[static_cast<std::size_t>(d) * n_data + j] =
          data_rows[static_cast<std::size_t>(j) * dim + d];
    }
  }
  for (int j = 0; j < n_model; ++j) {
    for (int d = 0; d < dim; ++d) {
      cache.model_cols[static_cast<std::size_t>(d) * n_model + j] =
          model_rows[static_cast<std::size_t>(j) * dim + d];
    }
  }
}

double t_nn(const CriticCache& cache, const double* x) {
  return query_one(cache, x, CacheSide::none, -1, false);
}

double t_nn(const CriticCache& cache, const double* x, CacheSide exclude,
            int exclude_idx) {
  return query_one(cache, x, exclude, exclude_idx, false);
}

double t_dnn(const CriticCache& cache, const double* x) {
  return query_one(cache, x, CacheSide::none, -1, true);
}

double t_dnn(const CriticCache& cache, const double* x, CacheSide exclude,
             int exclude_idx) {
  return query_one(cache, x, exclude, exclude_idx, true);
}

void critic_values(const CriticCache& cache, const double* queries, int n,
                   bool weighted, double* out) {
#pragma omp parallel for schedule(static)
  for (int q = 0; q < n; ++q) {
    out[q] = query_one(cache, queries + static_cast<std::size_t>(q) * cache.dim,
                       CacheSide::none, -1, weighted);
  }
}

double knn_density(const double* points, int n, int dim, const double* x,
                   int k) {
  if (n < 1 || dim < 1) {
    throw std::invalid_argument("knn_density: need points and dim >= 1");
  }
  if (k < 1 || k > n) {
    throw std::invalid_argument("knn_density: k must lie in [1, n]");
  }
  // k smallest squared distances via a scan with an insertion buffer
  std::vector<double> best(static_cast<std::size_t>(k),
                           std::numeric_limits<double>::infinity());
  for (int j = 0; j < n; ++j) {
    const double* p = points + static_cast<std::size_t>(j) * dim;
    double d2 = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double t = p[d] - x[d];
      d2 += t * t;
    }
    if (d2 >= best[k - 1]) continue;
    int pos = k - 1;
    while (pos > 0 && d2 < best[pos - 1]) {
      best[pos] = best[pos - 1];
      --pos;
    }
    best[pos] = d2;
  }
  const double dk = std::sqrt(best[k - 1]);
  if (dk == 0.0) {
    throw std::domain_error("knn_density: k-th neighbor distance is zero");
  }
  const double half = 0.5 * dim;
  const double log_ball = half * std::log(M_PI) - std::lgamma(half + 1.0);
  return std::exp(std::log(static_cast<double>(k)) -
                  std::log(static_cast<double>(n)) - log_ball -
                  dim * std::log(dk));
}

}  // namespace beam
