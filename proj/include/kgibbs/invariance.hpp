#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kgibbs/dynamics.hpp"
#include "kgibbs/measures.hpp"
#include "kgibbs/rng.hpp"
#include "kgibbs/stats.hpp"

namespace kgibbs {

struct Observable {
  std::string name;
  std::function<double(const SpectralField&)> eval;
};

Observable seminorm_observable(double radius, double order);
/// h sum chi(x_m) (Re u(x_m))^4 with the spec's localizer.
Observable quartic_observable(const MeasureSpec& spec);
Observable point_value_observable(double x);
Observable mode_power_observable(int mode);
Observable metric_observable();

/// p_{1,0}, quartic, Re u(0), |u_0|^2.
std::vector<Observable> default_panel(const MeasureSpec& spec);

struct ObservableResult {
  std::string name;
  double statistic = 0.0;
  double p_value = 1.0;
  double adjusted_p = 1.0;
  std::size_t n_reference = 0;
  std::size_t n_evolved = 0;
  bool pass = true;
};

struct StatReport {
  std::string experiment;
  int k = 0;
  std::string weight;
  double time = 0.0;
  std::optional<FlowConfig> flow;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::size_t samples = 0;
  double significance = 0.01;

  std::vector<ObservableResult> results;
  /// Observable values, one row per observable: reference then evolved.
  std::vector<std::vector<double>> reference_values;
  std::vector<std::vector<double>> evolved_values;
  bool all_pass = true;

  bool control_run = false;
  std::string control_description;
  std::string control_observable;
  double control_threshold = 0.0;
  std::vector<ObservableResult> control_results;
  /// The control must be rejected for the suite to be trusted.
  bool control_detected = false;

  std::size_t excluded = 0;
  std::size_t proposals = 0;
  double max_drift = 0.0;

  bool passed() const { return all_pass && (!control_run || control_detected); }
};

/// KS per observable with Bonferroni-adjusted p-values.
std::vector<ObservableResult> compare_populations(const std::vector<Observable>& observables,
                                                  const std::vector<std::vector<double>>& reference,
                                                  const std::vector<std::vector<double>>& evolved,
                                                  double significance);

struct LinearInvarianceOptions {
  double significance = 0.01;
  bool run_control = true;
  double control_shift = 0.5;
  /// Name of the observable the control must trip; empty picks the first
  /// point-value observable.
  std::string control_observable;
  double control_threshold = 1e-4;
};

StatReport run_linear_invariance(const MeasureSpec& spec, double t, std::size_t n,
                                 const std::vector<Observable>& observables, const RngStream& rng,
                                 const LinearInvarianceOptions& options = {});

struct GibbsInvarianceOptions {
  double significance = 0.01;
  bool run_control = true;
  /// Localizer of the flow used on the un-reweighted control ensemble.
  std::optional<WeightFunction> control_weight;
  std::string control_observable = "quartic";
  double control_threshold = 1e-3;
  double max_excluded_fraction = 0.01;
};

StatReport run_gibbs_invariance(const MeasureSpec& spec, double t, std::size_t n,
                                const std::vector<Observable>& observables, const FlowConfig& cfg,
                                const RngStream& rng, const GibbsInvarianceOptions& options = {});

/// E[d(phi_k, phi_k')] with phi_k and phi_k' built from one Brownian path.
MeanEstimate coupled_distance_diagnostic(int k, int k_ref, int samples, const RngStream& rng);

}  // namespace kgibbs
