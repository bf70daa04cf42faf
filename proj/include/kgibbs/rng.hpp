#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace kgibbs {

/// Explicit random stream identified by (seed, stream id). Identical pairs
/// reproduce identical draws; substreams derive disjoint ids so parallel
/// workers never share state.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Child stream for worker or sample `index`; independent of draw history.
  RngStream substream(std::uint64_t index) const;

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  /// Circular complex Gaussian with E|z|^2 = second_moment.
  std::complex<double> complex_normal(double second_moment);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace kgibbs
