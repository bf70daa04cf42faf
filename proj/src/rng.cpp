#include "kgibbs/rng.hpp"

#include <cmath>

namespace kgibbs {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(splitmix64(seed ^ splitmix64(stream)))};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(seeded_engine(seed, stream)) {}

RngStream RngStream::substream(std::uint64_t index) const {
  return RngStream(seed_, splitmix64(stream_ * 0x2545f4914f6cdd1dULL + splitmix64(index + 1)));
}

std::complex<double> RngStream::complex_normal(double second_moment) {
  const double sigma = std::sqrt(0.5 * second_moment);
  const double re = normal();
  const double im = normal();
  return {sigma * re, sigma * im};
}

}  // namespace kgibbs
