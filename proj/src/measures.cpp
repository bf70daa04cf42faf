#include "kgibbs/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kgibbs/dynamics.hpp"
#include "kgibbs/errors.hpp"
#include "kgibbs/parallel.hpp"

namespace kgibbs {

namespace {

FrequencyGrid level_grid(int k, int collocation) {
  if (k < 1 || k > MeasureSpec::kMaxLevel) {
    throw PreconditionError("MeasureSpec: k must lie in [1, " + std::to_string(MeasureSpec::kMaxLevel) + "]");
  }
  return FrequencyGrid(1 << k, k, collocation);
}

}  // namespace

MeasureSpec::MeasureSpec(int k, WeightFunction weight, int collocation)
    : k_(k), grid_(level_grid(k, collocation)), weight_(std::move(weight)), chi_(periodize_weight(weight_, grid_)) {}

SpectralField sample_mu_k(const MeasureSpec& spec, RngStream& rng) {
  const FrequencyGrid& g = spec.grid();
  const double n = g.density();
  SpectralField u(g);
  for (int j = g.min_mode(); j <= g.max_mode(); ++j) {
    const double xi = j / n;
    u.mode(j) = rng.complex_normal(1.0 / (n * (1.0 + xi * xi)));
  }
  return u;
}

double quartic_quadrature(const SpectralField& u, const MeasureSpec& spec) {
  if (!(u.grid() == spec.grid())) throw PreconditionError("quartic_quadrature: field is not on the spec grid");
  if (spec.weight().is_zero()) return 0.0;
  const Eigen::ArrayXd re = real_samples(u).array();
  return spec.cell() * (spec.weight_samples().array() * re.square().square()).sum();
}

double gibbs_weight(const SpectralField& u, const MeasureSpec& spec) {
  return std::exp(-quartic_quadrature(u, spec) / (4.0 * std::numbers::pi));
}

GibbsSample rejection_sample(const Proposal& propose, const Likelihood& likelihood, RngStream& rng,
                             std::size_t proposal_cap) {
  for (std::size_t n = 1; n <= proposal_cap; ++n) {
    SpectralField u = propose(rng);
    const double w = likelihood(u);
    if (!(w >= 0.0 && w <= 1.0)) throw NumericalError("rejection_sample: likelihood outside [0, 1]");
    if (rng.uniform() < w) return GibbsSample{std::move(u), w, true, n};
  }
  throw NumericalError("rejection_sample: proposal cap of " + std::to_string(proposal_cap) + " reached");
}

GibbsSample sample_rho_k(const MeasureSpec& spec, RngStream& rng, std::size_t proposal_cap) {
  return rejection_sample([&spec](RngStream& r) { return sample_mu_k(spec, r); },
                          [&spec](const SpectralField& u) { return gibbs_weight(u, spec); }, rng, proposal_cap);
}

std::vector<GibbsSample> sample_rho_k_batch(const MeasureSpec& spec, std::size_t count, const RngStream& rng,
                                            std::size_t proposal_cap) {
  std::vector<GibbsSample> out(count, GibbsSample{SpectralField(spec.grid())});
  parallel_for(count, [&](std::size_t i) {
    RngStream stream = rng.substream(i);
    out[i] = sample_rho_k(spec, stream, proposal_cap);
  });
  return out;
}

MeanEstimate estimate_gamma_k(const MeasureSpec& spec, int samples, const RngStream& rng) {
  if (samples < 100) throw PreconditionError("estimate_gamma_k: at least 100 samples are required");
  std::vector<double> w(static_cast<std::size_t>(samples));
  parallel_for(w.size(), [&](std::size_t i) {
    RngStream stream = rng.substream(i);
    w[i] = gibbs_weight(sample_mu_k(spec, stream), spec);
  });
  return mean_estimate(w);
}

double tail_statistic(const SpectralField& u, const Eigen::VectorXd& xi_samples, double cell, int p, int r) {
  if (p < 1 || r < 1) throw PreconditionError("tail_statistic: p and r must be >= 1");
  constexpr int nodes = 33;
  const Eigen::ArrayXd xi2 = xi_samples.array().square();
  double outer = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double tau = -1.0 + 2.0 * i / (nodes - 1);
    const Eigen::ArrayXd mod2 = synthesize(linear_flow(u, tau)).cwiseAbs2().array();
    const double inner = cell * (xi2 * mod2.pow(p)).sum();
    const double weight = (i == 0 || i == nodes - 1) ? 0.5 : 1.0;
    outer += weight * std::pow(inner, static_cast<double>(r) / p);
  }
  outer *= 2.0 / (nodes - 1);
  return std::pow(outer, 1.0 / (2.0 * r));
}

TailReport tail_survival(const MeasureSpec& spec, const WeightFunction& xi, int p, int r,
                         std::span<const double> lambdas, int samples, const RngStream& rng) {
  if (p < 1 || r < 1) throw PreconditionError("tail_survival: p and r must be >= 1");
  if (samples < 100) throw PreconditionError("tail_survival: at least 100 samples are required");
  if (!std::isfinite(xi.l2_norm_squared())) throw PreconditionError("tail_survival: xi must be square integrable");

  const Eigen::VectorXd xi_samples = xi.sample(spec.grid());
  std::vector<double> stat(static_cast<std::size_t>(samples));
  parallel_for(stat.size(), [&](std::size_t i) {
    RngStream stream = rng.substream(i);
    stat[i] = tail_statistic(sample_mu_k(spec, stream), xi_samples, spec.cell(), p, r);
  });

  TailReport rep;
  rep.p = p;
  rep.r = r;
  rep.samples = samples;
  if (lambdas.empty()) {
    const double top = *std::max_element(stat.begin(), stat.end());
    for (int i = 0; i < 32; ++i) rep.lambdas.push_back(top * i / 31.0);
  } else {
    rep.lambdas.assign(lambdas.begin(), lambdas.end());
  }
  std::sort(stat.begin(), stat.end());
  for (double lambda : rep.lambdas) {
    const auto below = std::lower_bound(stat.begin(), stat.end(), lambda) - stat.begin();
    const std::size_t exceed = stat.size() - static_cast<std::size_t>(below);
    rep.exceed.push_back(exceed);
    rep.survival.push_back(static_cast<double>(exceed) / samples);
  }
  for (std::size_t i = 0; i < rep.lambdas.size(); ++i) {
    for (std::size_t j = 0; j < rep.lambdas.size(); ++j) {
      if (rep.lambdas[i] <= rep.lambdas[j] && rep.survival[j] > rep.survival[i]) rep.monotone = false;
    }
  }

  // Tail region: past the median, with enough exceedances for a stable log.
  std::vector<double> l1, l2, ls;
  for (std::size_t i = 0; i < rep.lambdas.size(); ++i) {
    if (rep.survival[i] <= 0.5 && rep.exceed[i] >= 20) {
      l1.push_back(rep.lambdas[i]);
      l2.push_back(rep.lambdas[i] * rep.lambdas[i]);
      ls.push_back(std::log(rep.survival[i]));
    }
  }
  rep.fit_points = ls.size();
  if (ls.size() >= 2) {
    auto residual = [&](const std::vector<double>& x, double slope, double intercept) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += std::pow(ls[i] - (intercept + slope * x[i]), 2);
      return std::sqrt(s / x.size());
    };
    auto [qs, qi] = fit_line(l2, ls);
    rep.quadratic_rate = -qs;
    rep.quadratic_intercept = qi;
    rep.quadratic_residual = residual(l2, qs, qi);
    auto [ls1, li1] = fit_line(l1, ls);
    rep.linear_rate = -ls1;
    rep.linear_intercept = li1;
    rep.linear_residual = residual(l1, ls1, li1);
  }
  return rep;
}

}  // namespace kgibbs
