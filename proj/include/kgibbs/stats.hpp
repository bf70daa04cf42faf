#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>

namespace kgibbs {

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

MeanEstimate mean_estimate(std::span<const double> values);

/// Least-squares line through (x, y); returns {slope, intercept}.
std::pair<double, double> fit_line(std::span<const double> x, std::span<const double> y);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov survival Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_survival(double lambda);

/// Two-sample Kolmogorov-Smirnov: sup |F_a - F_b| with the asymptotic p-value
/// (Stephens' small-sample correction on the effective size).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// One-sample test of `samples` against a continuous CDF.
KsResult ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf);

double normal_cdf(double x, double mean = 0.0, double sigma = 1.0);

}  // namespace kgibbs
