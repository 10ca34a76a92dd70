#pragma once

#include <string>
#include <vector>

#include "beam/rbm.hpp"
#include "beam/rng.hpp"

namespace beam {

struct MogSpec {
  std::vector<std::vector<double>> modes;  // all the same dimension
  std::vector<double> weights;             // empty means uniform
  double std_dev = 0.1;                    // isotropic within each mode

  int dim() const { return modes.empty() ? 0 : static_cast<int>(modes[0].size()); }
  void validate() const;
};

// 1-D pair at +-1
MogSpec bimodal_spec();
// 8 modes on the radius-2 circle
MogSpec ring_spec();
// 5x5 grid on {-4,-2,0,2,4}^2
MogSpec grid_spec();

struct Dataset {
  LayerKind kind = LayerKind::gaussian;  // visible layer the rows imply
  int dim = 0;
  std::vector<double> rows;  // n x dim, row-major
  std::vector<int> train_idx, validation_idx;

  int n() const { return dim == 0 ? 0 : static_cast<int>(rows.size()) / dim; }
  const double* row(int r) const { return &rows[static_cast<std::size_t>(r) * dim]; }
};

Dataset mog_sample(const MogSpec& spec, int n, RngStream& rng);

enum class MnistVariant { continuous, binary };

// IDX image file: big-endian magic 0x00000803, 28x28 images. Continuous
// scales bytes to [0,1]; binary thresholds at 0.5.
Dataset mnist_load(const std::string& path, MnistVariant variant);

// IDX label file, big-endian magic 0x00000801.
std::vector<int> mnist_load_labels(const std::string& path);

// uniformly random disjoint split; partitions are kept sorted
void split_validation(Dataset& data, double fraction, RngStream& rng);

// one epoch of shuffled full minibatches over the train partition; a ragged
// final batch is dropped
std::vector<std::vector<int>> minibatches(const Dataset& data, int batch,
                                          RngStream& rng);

// contiguous copy of the given rows
std::vector<double> gather_rows(const Dataset& data, const std::vector<int>& idx);

// per-coordinate mean and standard deviation over the train partition
void train_column_moments(const Dataset& data, std::vector<double>& mean,
                          std::vector<double>& stddev);

}  // namespace beam
