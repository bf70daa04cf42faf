#pragma once

#include <numbers>

#include <Eigen/Dense>

#include "kgibbs/errors.hpp"

namespace kgibbs {

/// Frequency lattice j/N for j in [-NR, NR), spatial period 2*pi*N, and the
/// equispaced collocation grid x_m = -pi*N + 2*pi*N*m/M used for products.
class FrequencyGrid {
 public:
  /// Collocation size factor relative to the mode count: M = 4 * (2NR).
  static constexpr int kDealiasFactor = 4;

  FrequencyGrid(int density, int cutoff, int collocation = 0)
      : density_(density), cutoff_(cutoff), collocation_(collocation) {
    if (density <= 0 || cutoff <= 0) {
      throw PreconditionError("FrequencyGrid: N and R must be positive");
    }
    if (collocation_ == 0) collocation_ = kDealiasFactor * mode_count();
    if (collocation_ < kDealiasFactor * mode_count()) {
      throw PreconditionError("FrequencyGrid: collocation size must be at least 4*(2NR)");
    }
  }

  int density() const { return density_; }
  int cutoff() const { return cutoff_; }
  int collocation_size() const { return collocation_; }
  int mode_count() const { return 2 * density_ * cutoff_; }
  int min_mode() const { return -density_ * cutoff_; }
  int max_mode() const { return density_ * cutoff_ - 1; }
  bool contains_mode(int j) const { return j >= min_mode() && j <= max_mode(); }

  /// Storage slot of mode j.
  Eigen::Index slot(int j) const { return j - min_mode(); }
  int mode_at(Eigen::Index slot) const { return static_cast<int>(slot) + min_mode(); }

  double frequency(int j) const { return static_cast<double>(j) / density_; }
  double period() const { return 2.0 * std::numbers::pi * density_; }
  double half_period() const { return std::numbers::pi * density_; }
  double spacing() const { return period() / collocation_; }
  double point(Eigen::Index m) const { return -half_period() + spacing() * static_cast<double>(m); }

  Eigen::VectorXd points() const {
    Eigen::VectorXd x(collocation_);
    for (Eigen::Index m = 0; m < collocation_; ++m) x[m] = point(m);
    return x;
  }

  /// Same lattice and band, different collocation resolution.
  FrequencyGrid with_collocation(int collocation) const {
    return FrequencyGrid(density_, cutoff_, collocation);
  }

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  int density_;
  int cutoff_;
  int collocation_;
};

}  // namespace kgibbs
