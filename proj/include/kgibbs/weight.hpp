#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "kgibbs/grid.hpp"

namespace kgibbs {

/// Nonnegative localizer multiplying the cubic term.
///
/// Admissible profiles have finite integral, finite supremum and finite
/// first moment int sqrt(1+x^2) chi; constructors reject anything else with
/// InvalidWeightError.
class WeightFunction {
 public:
  struct Interval {
    double lo;
    double hi;
  };

  /// Constant c on a finite union of intervals (closed), zero elsewhere.
  struct Indicator {
    std::vector<Interval> intervals;
    double amplitude = 1.0;
  };

  /// c * (1 + x^2)^(-beta).
  struct Rational {
    double scale;
    double exponent;
  };

  /// Piecewise-linear through equispaced samples on [lo, hi], zero outside.
  struct Tabulated {
    double lo;
    double hi;
    std::vector<double> values;
  };

  static WeightFunction zero();
  static WeightFunction indicator(std::vector<Interval> intervals, double amplitude = 1.0);
  static WeightFunction rational(double scale, double exponent);
  static WeightFunction tabulated(double lo, double hi, std::vector<double> values);

  /// Parses `zero`, `[c*]indicator(a,b[,a2,b2...])`, `rational(c,beta)` or
  /// `table(lo,hi,v0,v1,...)`.
  static WeightFunction parse(std::string_view descriptor);

  double operator()(double x) const;

  double l1_norm() const;
  double sup_norm() const;
  /// int sqrt(1+x^2) chi(x) dx
  double first_moment() const;
  /// int chi(x)^2 dx
  double l2_norm_squared() const;

  bool is_zero() const;

  /// Largest alpha with chi <= C (1+x^2)^(-3 alpha / 2); infinity for
  /// compactly supported profiles.
  double pointwise_decay_alpha() const;
  /// Whether the closed-form pointwise decay bound holds for some alpha > 1.
  bool satisfies_pointwise_decay() const { return pointwise_decay_alpha() > 1.0; }

  /// Values chi(x_m) on the collocation grid. The collocation points lie in
  /// the fundamental domain, where the periodization agrees with chi.
  Eigen::VectorXd sample(const FrequencyGrid& grid) const;

  /// Canonical descriptor accepted by parse().
  std::string describe() const;

 private:
  using Form = std::variant<Indicator, Rational, Tabulated>;
  explicit WeightFunction(Form form);
  void validate() const;

  Form form_;
};

/// P_k chi sampled on the collocation grid.
Eigen::VectorXd periodize_weight(const WeightFunction& chi, const FrequencyGrid& grid);

}  // namespace kgibbs
