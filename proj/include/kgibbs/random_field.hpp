#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kgibbs/grid.hpp"
#include "kgibbs/rng.hpp"
#include "kgibbs/spectral.hpp"
#include "kgibbs/stats.hpp"

namespace kgibbs {

/// Complex Brownian increments delta_{N,k} = W_{(k+1)/N} - W_{k/N} for
/// k in [-NR, NR). E|delta|^2 = 1/N, real and imaginary parts each 1/(2N).
struct IncrementTable {
  FrequencyGrid grid;
  Eigen::VectorXcd increments;

  std::complex<double> at(int k) const { return increments[grid.slot(k)]; }
};

IncrementTable sample_increments(const FrequencyGrid& grid, RngStream& rng);

/// Brownian-bridge refinement: each coarse increment is split into
/// N_fine/N_coarse conditionally Gaussian pieces that sum to it exactly.
IncrementTable refine_increments(const IncrementTable& coarse, const FrequencyGrid& fine, RngStream& rng);

/// Block sums of a fine table onto a coarser lattice (band may shrink).
IncrementTable aggregate_increments(const IncrementTable& fine, const FrequencyGrid& coarse);

/// phi_{N,R}: coefficient k is delta_{N,k} (1 + (k/N)^2)^{-1/2}.
SpectralField build_phi(const IncrementTable& table);

/// sum_k 1/(N (1 + k^2/N^2)) = E|phi_{N,R}(x)|^2 for every x.
double pointwise_variance(const FrequencyGrid& grid);

/// Direct evaluation of sum_j u_j exp(i j x / N) at an arbitrary point.
std::complex<double> evaluate_at(const SpectralField& u, double x);

struct CauchyRateReport {
  std::vector<int> levels;
  std::vector<double> rms;
  std::vector<double> std_error;
  int fine_level = 0;
  int cutoff = 0;
  double probe = 0.0;
  int samples = 0;
  /// Least-squares slope and intercept of log2(rms) against the level.
  double slope = 0.0;
  double intercept = 0.0;
  /// max over levels of rms * 2^m / sqrt(1 + x^2)
  double rate_constant = 0.0;
};

/// RMS distance at `probe` between coupled phi_{2^n,R} and phi_{2^m,R}, the
/// coarse fields obtained from one Brownian path by successive refinement.
CauchyRateReport cauchy_rate(std::span<const int> levels, int fine_level, int cutoff, double probe, int samples,
                             const RngStream& rng);

/// Exact E|phi_{2^n,R}(x) - phi_{2^m,R}(x)|^2 under the refinement coupling.
double cauchy_rate_exact_variance(int level, int fine_level, int cutoff, double probe);

struct MassProfile {
  int k = 0;
  std::vector<double> radii;
  std::vector<double> mean;
  std::vector<double> std_error;
  double slope = 0.0;
  double intercept = 0.0;
  double pointwise_variance = 0.0;
};

/// Empirical E[p_{R,0}(phi_k)^2] per window radius, phi_k = phi_{2^k, k}.
MassProfile l2_mass_profile(int k, std::span<const double> radii, int samples, const RngStream& rng);

}  // namespace kgibbs
