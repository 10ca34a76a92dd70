#pragma once

#include <cstdint>

namespace beam {

// Seeded splitmix64 stream. Every logical consumer (each particle's state
// draws, each particle's beta chain, shuffling, model init, ...) owns its own
// stream, so work can be reordered or run in parallel without changing any
// draw. The full stream state is a single 64-bit word, which checkpoints
// store verbatim.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double uniform();      // [0, 1)
  double uniform_pos();  // (0, 1]
  double normal();       // standard normal, Marsaglia polar method
  double gamma(double shape, double scale);
  long long poisson(double mean);

  std::uint64_t state() const { return state_; }
  void set_state(std::uint64_t s) { state_ = s; }

 private:
  std::uint64_t state_ = 0;
};

// Fixed stream labels; particle streams add their particle index.
enum class Stream : std::uint32_t {
  particle_state = 1,
  particle_beta = 2,
  model_init = 3,
  data_gen = 4,
  split = 5,
  shuffle = 6,
  eval = 7,
};

constexpr std::uint64_t stream_id(Stream kind, std::uint32_t index = 0) {
  return (static_cast<std::uint64_t>(kind) << 32) | index;
}

}  // namespace beam
