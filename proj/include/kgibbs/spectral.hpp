#pragma once

#include <cmath>
#include <complex>
#include <utility>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "kgibbs/errors.hpp"
#include "kgibbs/grid.hpp"

namespace kgibbs {

template <typename Real>
using ComplexVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// Element u = sum_j u_j exp(i j x / N) of the band-limited space on a
/// FrequencyGrid. Coefficients are stored in increasing mode order.
template <typename Real>
class BasicSpectralField {
 public:
  using Scalar = std::complex<Real>;
  using Coefficients = ComplexVector<Real>;

  explicit BasicSpectralField(const FrequencyGrid& grid)
      : grid_(grid), coeffs_(Coefficients::Zero(grid.mode_count())) {}

  BasicSpectralField(const FrequencyGrid& grid, Coefficients coeffs)
      : grid_(grid), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != grid_.mode_count()) {
      throw PreconditionError("SpectralField: coefficient count must equal 2NR");
    }
  }

  const FrequencyGrid& grid() const { return grid_; }
  const Coefficients& coeffs() const { return coeffs_; }
  Coefficients& coeffs() { return coeffs_; }

  Scalar mode(int j) const { return coeffs_[grid_.slot(j)]; }
  Scalar& mode(int j) { return coeffs_[grid_.slot(j)]; }

  BasicSpectralField& operator+=(const BasicSpectralField& other) {
    require_same_grid(other);
    coeffs_ += other.coeffs_;
    return *this;
  }
  BasicSpectralField& operator-=(const BasicSpectralField& other) {
    require_same_grid(other);
    coeffs_ -= other.coeffs_;
    return *this;
  }
  BasicSpectralField& operator*=(Scalar factor) {
    coeffs_ *= factor;
    return *this;
  }

  friend BasicSpectralField operator+(BasicSpectralField a, const BasicSpectralField& b) { return a += b; }
  friend BasicSpectralField operator-(BasicSpectralField a, const BasicSpectralField& b) { return a -= b; }
  friend BasicSpectralField operator*(Scalar factor, BasicSpectralField a) { return a *= factor; }

 private:
  void require_same_grid(const BasicSpectralField& other) const {
    if (!(grid_ == other.grid_)) throw PreconditionError("SpectralField: grids differ");
  }

  FrequencyGrid grid_;
  Coefficients coeffs_;
};

using SpectralField = BasicSpectralField<double>;

namespace detail {

template <typename Real>
Eigen::FFT<Real>& fft_engine() {
  // kissfft caches twiddles per size; one engine per thread keeps it race-free.
  thread_local Eigen::FFT<Real> engine = [] {
    Eigen::FFT<Real> e;
    e.SetFlag(Eigen::FFT<Real>::Unscaled);
    return e;
  }();
  return engine;
}

inline Eigen::Index fft_bin(int j, int size) {
  const int b = j % size;
  return b < 0 ? b + size : b;
}

inline double parity(int j) { return (j % 2 == 0) ? 1.0 : -1.0; }

}  // namespace detail

/// (1 + (j/N)^2)^{s/2} for every mode of the grid.
template <typename Real>
RealVector<Real> bessel_multiplier(const FrequencyGrid& grid, Real s) {
  RealVector<Real> m(grid.mode_count());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Real xi = static_cast<Real>(grid.frequency(grid.mode_at(i)));
    m[i] = std::pow(Real(1) + xi * xi, s / Real(2));
  }
  return m;
}

/// D^s with D = sqrt(1 - Laplacian).
template <typename Real>
BasicSpectralField<Real> apply_bessel_power(BasicSpectralField<Real> u, Real s) {
  if (s == Real(0)) return u;
  u.coeffs().array() *= bessel_multiplier<Real>(u.grid(), s).array().template cast<std::complex<Real>>();
  return u;
}

/// Values u(x_m) on the collocation grid. The grid starts at -pi*N, so mode j
/// picks up a (-1)^j phase relative to a plain DFT.
template <typename Real>
ComplexVector<Real> synthesize(const BasicSpectralField<Real>& u) {
  const FrequencyGrid& grid = u.grid();
  const int size = grid.collocation_size();
  ComplexVector<Real> spectrum = ComplexVector<Real>::Zero(size);
  for (int j = grid.min_mode(); j <= grid.max_mode(); ++j) {
    spectrum[detail::fft_bin(j, size)] = static_cast<Real>(detail::parity(j)) * u.mode(j);
  }
  ComplexVector<Real> samples(size);
  detail::fft_engine<Real>().inv(samples.data(), spectrum.data(), size);
  return samples;
}

template <typename Real>
RealVector<Real> real_samples(const BasicSpectralField<Real>& u) {
  return synthesize(u).real();
}

/// Inverse of synthesize on band-limited data; out-of-band content is dropped
/// (or aliased onto the band if the samples are under-resolved).
template <typename Real>
BasicSpectralField<Real> analyze(const ComplexVector<Real>& samples, const FrequencyGrid& grid) {
  const int size = grid.collocation_size();
  if (samples.size() != size) {
    throw PreconditionError("analyze: sample count must equal the collocation size");
  }
  ComplexVector<Real> spectrum(size);
  detail::fft_engine<Real>().fwd(spectrum.data(), samples.data(), size);
  BasicSpectralField<Real> u(grid);
  const Real scale = Real(1) / static_cast<Real>(size);
  for (int j = grid.min_mode(); j <= grid.max_mode(); ++j) {
    u.mode(j) = static_cast<Real>(detail::parity(j)) * scale * spectrum[detail::fft_bin(j, size)];
  }
  return u;
}

template <typename Real>
BasicSpectralField<Real> analyze(const RealVector<Real>& samples, const FrequencyGrid& grid) {
  return analyze<Real>(ComplexVector<Real>(samples.template cast<std::complex<Real>>()), grid);
}

/// Band truncation to physical frequencies in [-R, R) of the target grid.
/// Source and target must share the lattice spacing 1/N.
template <typename Real>
BasicSpectralField<Real> truncate_pi_k(const BasicSpectralField<Real>& source, const FrequencyGrid& target) {
  if (source.grid().density() != target.density()) {
    throw PreconditionError("truncate_pi_k: source and target lattices differ");
  }
  BasicSpectralField<Real> out(target);
  for (int j = target.min_mode(); j <= target.max_mode(); ++j) {
    if (source.grid().contains_mode(j)) out.mode(j) = source.mode(j);
  }
  return out;
}

/// Band truncation of collocation samples on the target grid.
template <typename Real>
BasicSpectralField<Real> truncate_pi_k(const ComplexVector<Real>& samples, const FrequencyGrid& target) {
  return analyze<Real>(samples, target);
}

/// Exact embedding into a finer lattice (N' = r*N) with a wider band: the
/// function on the real line is unchanged, new modes are zero.
template <typename Real>
BasicSpectralField<Real> embed(const BasicSpectralField<Real>& source, const FrequencyGrid& target) {
  const FrequencyGrid& g = source.grid();
  if (target.density() % g.density() != 0) {
    throw PreconditionError("embed: target lattice must refine the source lattice");
  }
  const int ratio = target.density() / g.density();
  BasicSpectralField<Real> out(target);
  for (int j = g.min_mode(); j <= g.max_mode(); ++j) {
    if (source.mode(j) == std::complex<Real>(0)) continue;
    if (!target.contains_mode(j * ratio)) {
      throw PreconditionError("embed: source band exceeds the target band");
    }
    out.mode(j * ratio) = source.mode(j);
  }
  return out;
}

/// Window seminorm p_{R,s}.
struct SeminormSpec {
  double radius;
  double order;

  SeminormSpec(double r, double s) : radius(r), order(s) {
    if (!(r > 0.0) || !std::isfinite(r) || !std::isfinite(s)) {
      throw PreconditionError("SeminormSpec: radius must be positive and finite");
    }
  }
};

/// Quadrature weights for the integral over [-R, R] of a 2*pi*N periodic
/// function sampled on the collocation grid: each sample owns the cell
/// [x_m - h/2, x_m + h/2], weighted by its overlap with the window (and its
/// periodic images).
inline Eigen::VectorXd window_weights(const FrequencyGrid& grid, double radius) {
  const double h = grid.spacing();
  const double period = grid.period();
  const int images = static_cast<int>(std::floor(radius / period)) + 1;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(grid.collocation_size());
  for (Eigen::Index m = 0; m < w.size(); ++m) {
    const double c = grid.point(m);
    double total = 0.0;
    for (int n = -images; n <= images; ++n) {
      const double lo = std::max(-radius, c - 0.5 * h + n * period);
      const double hi = std::min(radius, c + 0.5 * h + n * period);
      if (hi > lo) total += hi - lo;
    }
    w[m] = total;
  }
  return w;
}

/// p_{R,s} evaluated on the periodic extension; R may exceed the fundamental
/// domain.
template <typename Real>
Real periodic_seminorm(const BasicSpectralField<Real>& u, const SeminormSpec& spec) {
  const RealVector<Real> sq = synthesize(apply_bessel_power(u, static_cast<Real>(spec.order))).cwiseAbs2();
  const RealVector<Real> w = window_weights(u.grid(), spec.radius).template cast<Real>();
  return std::sqrt(std::max(Real(0), w.dot(sq)));
}

/// p_{R,s}(u) = (int_{-R}^{R} |D^s u|^2)^{1/2}, requiring R <= pi*N.
template <typename Real>
Real seminorm(const BasicSpectralField<Real>& u, const SeminormSpec& spec) {
  if (spec.radius > u.grid().half_period() * (1.0 + 1e-12)) {
    throw PreconditionError("seminorm: window exceeds the fundamental domain");
  }
  return periodic_seminorm(u, spec);
}

/// Closed form of p_{pi N, s}: 2*pi*N * sum_j (1 + (j/N)^2)^s |u_j|^2.
template <typename Real>
Real full_domain_seminorm(const BasicSpectralField<Real>& u, Real s) {
  const RealVector<Real> m = bessel_multiplier<Real>(u.grid(), Real(2) * s);
  return std::sqrt(static_cast<Real>(u.grid().period()) * m.dot(u.coeffs().cwiseAbs2()));
}

struct MetricValue {
  double value = 0.0;
  /// Upper bound on the omitted terms, 2^{-K} + 2^{-L}.
  double tail_bound = 0.0;
};

/// Truncated distance sum_{k<=K, l<=L} 2^{-(k+l)} p/(1+p), p = p_{k,1/2-1/l}(u-v).
template <typename Real>
MetricValue metric_d(const BasicSpectralField<Real>& u, const BasicSpectralField<Real>& v, int max_radius = 16,
                     int max_order = 16) {
  if (max_radius < 1 || max_order < 1) throw PreconditionError("metric_d: truncation indices must be >= 1");
  const BasicSpectralField<Real> diff = u - v;
  const FrequencyGrid& grid = diff.grid();

  Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> windows(max_radius, grid.collocation_size());
  for (int k = 1; k <= max_radius; ++k) {
    windows.row(k - 1) = window_weights(grid, k).template cast<Real>().transpose();
  }

  double total = 0.0;
  for (int l = 1; l <= max_order; ++l) {
    const Real s = Real(0.5) - Real(1) / static_cast<Real>(l);
    const RealVector<Real> sq = synthesize(apply_bessel_power(diff, s)).cwiseAbs2();
    const RealVector<Real> p2 = windows * sq;
    for (int k = 1; k <= max_radius; ++k) {
      const double p = std::sqrt(std::max(0.0, static_cast<double>(p2[k - 1])));
      total += std::ldexp(1.0, -(k + l)) * p / (1.0 + p);
    }
  }
  return {total, std::ldexp(1.0, -max_radius) + std::ldexp(1.0, -max_order)};
}

}  // namespace kgibbs
