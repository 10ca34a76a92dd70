#include "beam/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace beam {

void MogSpec::validate() const {
  if (modes.empty()) throw std::invalid_argument("mog: no modes");
  for (const auto& m : modes) {
    if (static_cast<int>(m.size()) != dim()) {
      throw std::invalid_argument("mog: modes disagree on dimension");
    }
  }
  if (!weights.empty()) {
    if (weights.size() != modes.size()) {
      throw std::invalid_argument("mog: weights do not match modes");
    }
    double s = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("mog: negative weight");
      s += w;
    }
    if (s <= 0.0) throw std::invalid_argument("mog: weights sum to zero");
  }
  if (!(std_dev > 0.0)) throw std::invalid_argument("mog: std_dev must be positive");
}

MogSpec bimodal_spec() {
  MogSpec s;
  s.modes = {{-1.0}, {1.0}};
  s.std_dev = 0.1;
  return s;
}

MogSpec ring_spec() {
  MogSpec s;
  for (int j = 0; j < 8; ++j) {
    double a = 2.0 * M_PI * j / 8.0;
    s.modes.push_back({2.0 * std::cos(a), 2.0 * std::sin(a)});
  }
  s.std_dev = 0.02;
  return s;
}

MogSpec grid_spec() {
  MogSpec s;
  for (int a = -4; a <= 4; a += 2) {
    for (int b = -4; b <= 4; b += 2) {
      s.modes.push_back({static_cast<double>(a), static_cast<double>(b)});
    }
  }
  s.std_dev = 0.05;
  return s;
}

Dataset mog_sample(const MogSpec& spec, int n, RngStream& rng) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("mog_sample: n must be >= 1");
  const int d = spec.dim();
  std::vector<double> cum(spec.modes.size());
  double total = 0.0;
  for (std::size_t j = 0; j < spec.modes.size(); ++j) {
    total += spec.weights.empty() ? 1.0 : spec.weights[j];
    cum[j] = total;
  }
  Dataset out;
  out.kind = LayerKind::gaussian;
  out.dim = d;
  out.rows.resize(static_cast<std::size_t>(n) * d);
  for (int r = 0; r < n; ++r) {
    double u = rng.uniform() * total;
    std::size_t mode = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
    if (mode >= spec.modes.size()) mode = spec.modes.size() - 1;
    for (int i = 0; i < d; ++i) {
      out.rows[static_cast<std::size_t>(r) * d + i] =
          spec.modes[mode][i] + spec.std_dev * rng.normal();
    }
  }
  return out;
}

namespace {

std::uint32_t read_be32(std::ifstream& f, const std::string& path) {
  unsigned char b[4];
  if (!f.read(reinterpret_cast<char*>(b), 4)) {
    throw std::runtime_error("idx: truncated header in " + path);
  }
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace

Dataset mnist_load(const std::string& path, MnistVariant variant) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("idx: cannot open " + path);
  const std::uint32_t magic = read_be32(f, path);
  if (magic != 0x00000803u) {
    throw std::runtime_error("idx: bad image magic in " + path);
  }
  const std::uint32_t count = read_be32(f, path);
  const std::uint32_t rows = read_be32(f, path);
  const std::uint32_t cols = read_be32(f, path);
  if (rows != 28 || cols != 28) {
    throw std::runtime_error("idx: expected 28x28 images in " + path);
  }
  if (count < 1) throw std::runtime_error("idx: empty image file " + path);
  const std::size_t pixels = std::size_t(count) * rows * cols;
  std::vector<unsigned char> raw(pixels);
  if (!f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(pixels))) {
    throw std::runtime_error("idx: truncated image data in " + path);
  }
  Dataset out;
  out.kind = variant == MnistVariant::binary ? LayerKind::bernoulli
                                             : LayerKind::gaussian;
  out.dim = static_cast<int>(rows * cols);
  out.rows.resize(pixels);
  for (std::size_t i = 0; i < pixels; ++i) {
    double x = raw[i] / 255.0;
    out.rows[i] = variant == MnistVariant::binary ? (x > 0.5 ? 1.0 : 0.0) : x;
  }
  return out;
}

std::vector<int> mnist_load_labels(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("idx: cannot open " + path);
  const std::uint32_t magic = read_be32(f, path);
  if (magic != 0x00000801u) {
    throw std::runtime_error("idx: bad label magic in " + path);
  }
  const std::uint32_t count = read_be32(f, path);
  std::vector<unsigned char> raw(count);
  if (!f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count))) {
    throw std::runtime_error("idx: truncated label data in " + path);
  }
  return std::vector<int>(raw.begin(), raw.end());
}

namespace {

// Fisher-Yates with a bounded draw
void shuffle_ints(std::vector<int>& xs, RngStream& rng) {
  for (std::size_t i = xs.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(
        (static_cast<unsigned __int128>(rng.next_u64()) * i) >> 64);
    std::swap(xs[i - 1], xs[j]);
  }
}

}  // namespace

void split_validation(Dataset& data, double fraction, RngStream& rng) {
  if (!(fraction > 0.0) || !(fraction < 1.0)) {
    throw std::invalid_argument("split_validation: fraction out of range (0, 1)");
  }
  const int n = data.n();
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  shuffle_ints(idx, rng);
  const int n_val = static_cast<int>(std::llround(fraction * n));
  data.validation_idx.assign(idx.begin(), idx.begin() + n_val);
  data.train_idx.assign(idx.begin() + n_val, idx.end());
  std::sort(data.validation_idx.begin(), data.validation_idx.end());
  std::sort(data.train_idx.begin(), data.train_idx.end());
}

std::vector<std::vector<int>> minibatches(const Dataset& data, int batch,
                                          RngStream& rng) {
  if (batch < 1) throw std::invalid_argument("minibatches: batch must be >= 1");
  std::vector<int> order = data.train_idx;
  if (order.empty()) {
    // unsplit dataset: batch over everything
    order.resize(data.n());
    for (int i = 0; i < data.n(); ++i) order[i] = i;
  }
  shuffle_ints(order, rng);
  std::vector<std::vector<int>> blocks;
  for (std::size_t at = 0; at + batch <= order.size(); at += batch) {
    blocks.emplace_back(order.begin() + at, order.begin() + at + batch);
  }
  return blocks;
}

std::vector<double> gather_rows(const Dataset& data, const std::vector<int>& idx) {
  std::vector<double> out(idx.size() * static_cast<std::size_t>(data.dim));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double* src = data.row(idx[r]);
    std::copy(src, src + data.dim, out.begin() + r * data.dim);
  }
  return out;
}

void train_column_moments(const Dataset& data, std::vector<double>& mean,
                          std::vector<double>& stddev) {
  const std::vector<int>& idx = data.train_idx;
  if (idx.empty()) throw std::invalid_argument("train_column_moments: no train split");
  mean.assign(data.dim, 0.0);
  stddev.assign(data.dim, 0.0);
  for (int r : idx) {
    const double* row = data.row(r);
    for (int d = 0; d < data.dim; ++d) mean[d] += row[d];
  }
  for (int d = 0; d < data.dim; ++d) mean[d] /= static_cast<double>(idx.size());
  for (int r : idx) {
    const double* row = data.row(r);
    for (int d = 0; d < data.dim; ++d) {
      double t = row[d] - mean[d];
      stddev[d] += t * t;
    }
  }
  for (int d = 0; d < data.dim; ++d) {
    stddev[d] = std::sqrt(stddev[d] / static_cast<double>(idx.size()));
  }
}

}  // namespace beam
