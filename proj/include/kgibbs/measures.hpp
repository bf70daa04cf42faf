#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kgibbs/grid.hpp"
#include "kgibbs/rng.hpp"
#include "kgibbs/spectral.hpp"
#include "kgibbs/stats.hpp"
#include "kgibbs/weight.hpp"

namespace kgibbs {

/// Truncation level k: N_k = 2^k, R_k = k, plus the localizer and its
/// samples on the collocation grid.
class MeasureSpec {
 public:
  static constexpr int kMaxLevel = 16;

  MeasureSpec(int k, WeightFunction weight, int collocation = 0);

  int k() const { return k_; }
  int density() const { return grid_.density(); }
  int cutoff() const { return grid_.cutoff(); }
  const FrequencyGrid& grid() const { return grid_; }
  const WeightFunction& weight() const { return weight_; }
  /// chi(x_m) on the collocation grid.
  const Eigen::VectorXd& weight_samples() const { return chi_; }
  /// Quadrature cell 2*pi*N/M.
  double cell() const { return grid_.spacing(); }

  MeasureSpec with_weight(WeightFunction weight) const { return MeasureSpec(k_, std::move(weight), grid_.collocation_size()); }

 private:
  int k_;
  FrequencyGrid grid_;
  WeightFunction weight_;
  Eigen::VectorXd chi_;
};

/// Independent complex Gaussian coefficients, E|u_j|^2 = 1/(N(1 + j^2/N^2)).
SpectralField sample_mu_k(const MeasureSpec& spec, RngStream& rng);

/// h * sum_m chi(x_m) (Re u(x_m))^4, the collocation quadrature of the
/// quartic integral over the fundamental domain.
double quartic_quadrature(const SpectralField& u, const MeasureSpec& spec);

/// f_k(u) = exp(-quartic_quadrature(u) / (4 pi)).
double gibbs_weight(const SpectralField& u, const MeasureSpec& spec);

struct GibbsSample {
  SpectralField field;
  double weight = 1.0;
  bool accepted = false;
  std::size_t proposals = 0;
};

using Proposal = std::function<SpectralField(RngStream&)>;
using Likelihood = std::function<double(const SpectralField&)>;

/// Draws proposals until one is accepted with probability likelihood(u) in
/// [0, 1]. Throws NumericalError after `proposal_cap` rejections.
GibbsSample rejection_sample(const Proposal& propose, const Likelihood& likelihood, RngStream& rng,
                             std::size_t proposal_cap = 1'000'000);

/// Exact draw from rho_k = f_k mu_k / Gamma_k.
GibbsSample sample_rho_k(const MeasureSpec& spec, RngStream& rng, std::size_t proposal_cap = 1'000'000);

/// `count` independent rho_k draws, draw i on substream i.
std::vector<GibbsSample> sample_rho_k_batch(const MeasureSpec& spec, std::size_t count, const RngStream& rng,
                                            std::size_t proposal_cap = 1'000'000);

/// Monte Carlo mean of f_k under mu_k.
MeanEstimate estimate_gamma_k(const MeasureSpec& spec, int samples, const RngStream& rng);

/// (int_{-1}^{1} (int xi^2 |L(tau)u|^{2p} dx)^{r/p} dtau)^{1/(2r)} with a
/// 33-point trapezoid rule in tau.
double tail_statistic(const SpectralField& u, const Eigen::VectorXd& xi_samples, double cell, int p, int r);

struct TailReport {
  int p = 1;
  int r = 1;
  int samples = 0;
  std::vector<double> lambdas;
  std::vector<double> survival;
  std::vector<std::size_t> exceed;
  bool monotone = true;
  /// log S = intercept - quadratic_rate * Lambda^2 over well-populated points.
  double quadratic_rate = 0.0;
  double quadratic_intercept = 0.0;
  double quadratic_residual = 0.0;
  /// log S = intercept - linear_rate * Lambda on the same points.
  double linear_rate = 0.0;
  double linear_intercept = 0.0;
  double linear_residual = 0.0;
  std::size_t fit_points = 0;
};

/// Empirical survival of the tail statistic under mu_k. An empty lambda grid
/// is replaced by 32 points from 0 to the largest observed statistic.
TailReport tail_survival(const MeasureSpec& spec, const WeightFunction& xi, int p, int r,
                         std::span<const double> lambdas, int samples, const RngStream& rng);

}  // namespace kgibbs
