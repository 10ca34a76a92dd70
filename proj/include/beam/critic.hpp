#pragma once

#include <vector>

namespace beam {

struct CriticConfig {
  int k = 5;
  double epsilon = 1e-3;  // distance softening for the weighted critic
  bool weighted = true;   // t_dnn when true, t_nn otherwise
};

// Nearest-neighbor classifier state: the data-side and model-side feature
// points from the previous gradient evaluation. Points are stored
// column-major so distance accumulation vectorizes; update_cache replaces
// the whole contents, it never appends.
struct CriticCache {
  int dim = 0;
  int k = 5;
  double epsilon = 1e-3;
  int n_data = 0;
  int n_model = 0;
  std::vector<double> data_cols;   // dim x n_data, coordinate-major
  std::vector<double> model_cols;  // dim x n_model

  bool empty() const { return n_data + n_model == 0; }
  std::vector<double> data_row(int j) const;
  std::vector<double> model_row(int j) const;
};

enum class CacheSide { none, data, model };

void update_cache(CriticCache& cache, const double* data_rows, int n_data,
                  const double* model_rows, int n_model, int dim);

// Vote critic: 2 j / k - 1 where j counts data-side points among the k
// nearest cache points. Ties break data first, then insertion index.
double t_nn(const CriticCache& cache, const double* x);
double t_nn(const CriticCache& cache, const double* x, CacheSide exclude,
            int exclude_idx);

// Distance-weighted critic with weights 1 / (d + epsilon).
double t_dnn(const CriticCache& cache, const double* x);
double t_dnn(const CriticCache& cache, const double* x, CacheSide exclude,
             int exclude_idx);

// critic for a batch of query rows, parallel across queries
void critic_values(const CriticCache& cache, const double* queries, int n,
                   bool weighted, double* out);

// k-NN density estimate k / (n * V_dim * d_k^dim) with V_dim the unit-ball
// volume; evaluated through logs so large dims stay finite. Throws on
// d_k = 0 (duplicate point).
double knn_density(const double* points, int n, int dim, const double* x,
                   int k);

}  // namespace beam
