#include "kgibbs/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "kgibbs/errors.hpp"
#include "kgibbs/parallel.hpp"
#include "kgibbs/random_field.hpp"

namespace kgibbs {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// rows: observable, columns: sample
std::vector<std::vector<double>> evaluate_panel(const std::vector<Observable>& observables,
                                                const std::vector<SpectralField>& fields) {
  std::vector<std::vector<double>> out(observables.size(), std::vector<double>(fields.size()));
  parallel_for(fields.size(), [&](std::size_t s) {
    for (std::size_t o = 0; o < observables.size(); ++o) {
      const double v = observables[o].eval(fields[s]);
      if (!std::isfinite(v)) throw NumericalError("observable '" + observables[o].name + "' is not finite");
      out[o][s] = v;
    }
  });
  return out;
}

std::vector<SpectralField> draw_mu(const MeasureSpec& spec, std::size_t n, const RngStream& rng) {
  std::vector<SpectralField> out(n, SpectralField(spec.grid()));
  parallel_for(n, [&](std::size_t i) {
    RngStream s = rng.substream(i);
    out[i] = sample_mu_k(spec, s);
  });
  return out;
}

std::vector<SpectralField> draw_rho(const MeasureSpec& spec, std::size_t n, const RngStream& rng,
                                    std::size_t& proposals) {
  std::vector<GibbsSample> batch = sample_rho_k_batch(spec, n, rng);
  std::vector<SpectralField> out;
  out.reserve(n);
  for (auto& g : batch) {
    proposals += g.proposals;
    out.push_back(std::move(g.field));
  }
  return out;
}

std::size_t find_observable(const std::vector<Observable>& observables, const std::string& name) {
  for (std::size_t i = 0; i < observables.size(); ++i) {
    if (observables[i].name == name) return i;
  }
  throw PreconditionError("control observable '" + name + "' is not in the panel");
}

struct EvolvedBatch {
  std::vector<SpectralField> fields;
  std::size_t excluded = 0;
  double max_drift = 0.0;
};

EvolvedBatch evolve_batch(const std::vector<SpectralField>& initial, const MeasureSpec& spec, double t,
                          const FlowConfig& base) {
  FlowConfig cfg = base;
  cfg.horizon = t;
  cfg.record_stride = 0;
  std::vector<TrajectoryRecord> records(initial.size());
  parallel_for(initial.size(), [&](std::size_t i) { records[i] = evolve_psi_k(initial[i], spec, cfg); });
  EvolvedBatch out;
  for (auto& r : records) {
    out.max_drift = std::max(out.max_drift, r.max_relative_drift);
    if (r.flagged) {
      ++out.excluded;
    } else {
      out.fields.push_back(r.final_state());
    }
  }
  return out;
}

}  // namespace

Observable seminorm_observable(double radius, double order) {
  const SeminormSpec spec(radius, order);
  return {"p_R" + fmt(radius) + "_s" + fmt(order), [spec](const SpectralField& u) { return seminorm(u, spec); }};
}

Observable quartic_observable(const MeasureSpec& spec) {
  return {"quartic", [spec](const SpectralField& u) { return quartic_quadrature(u, spec); }};
}

Observable point_value_observable(double x) {
  return {"re_u_at_" + fmt(x), [x](const SpectralField& u) { return evaluate_at(u, x).real(); }};
}

Observable mode_power_observable(int mode) {
  return {"mode_power_" + std::to_string(mode), [mode](const SpectralField& u) { return std::norm(u.mode(mode)); }};
}

Observable metric_observable() {
  return {"metric_d_zero", [](const SpectralField& u) { return metric_d(u, SpectralField(u.grid())).value; }};
}

std::vector<Observable> default_panel(const MeasureSpec& spec) {
  return {seminorm_observable(1.0, 0.0), quartic_observable(spec), point_value_observable(0.0),
          mode_power_observable(0)};
}

std::vector<ObservableResult> compare_populations(const std::vector<Observable>& observables,
                                                  const std::vector<std::vector<double>>& reference,
                                                  const std::vector<std::vector<double>>& evolved,
                                                  double significance) {
  std::vector<ObservableResult> out;
  const double m = static_cast<double>(observables.size());
  for (std::size_t o = 0; o < observables.size(); ++o) {
    const KsResult ks = ks_two_sample(reference[o], evolved[o]);
    ObservableResult r;
    r.name = observables[o].name;
    r.statistic = ks.statistic;
    r.p_value = ks.p_value;
    r.adjusted_p = std::min(1.0, ks.p_value * m);
    r.n_reference = reference[o].size();
    r.n_evolved = evolved[o].size();
    r.pass = r.adjusted_p >= significance;
    out.push_back(r);
  }
  return out;
}

StatReport run_linear_invariance(const MeasureSpec& spec, double t, std::size_t n,
                                 const std::vector<Observable>& observables, const RngStream& rng,
                                 const LinearInvarianceOptions& options) {
  if (n < 1000) throw PreconditionError("run_linear_invariance: at least 1000 samples are required");
  if (observables.empty()) throw PreconditionError("run_linear_invariance: empty observable panel");

  StatReport rep;
  rep.experiment = "lin-invariance";
  rep.k = spec.k();
  rep.weight = spec.weight().describe();
  rep.time = t;
  rep.seed = rng.seed();
  rep.stream = rng.stream();
  rep.samples = n;
  rep.significance = options.significance;

  // Disjoint substreams: 0 reference, 1 evolved, 2 control.
  rep.reference_values = evaluate_panel(observables, draw_mu(spec, n, rng.substream(0)));
  std::vector<SpectralField> evolved = draw_mu(spec, n, rng.substream(1));
  for (auto& u : evolved) u = linear_flow(u, t);
  rep.evolved_values = evaluate_panel(observables, evolved);
  rep.results = compare_populations(observables, rep.reference_values, rep.evolved_values, options.significance);
  rep.all_pass = std::all_of(rep.results.begin(), rep.results.end(), [](const auto& r) { return r.pass; });

  if (options.run_control) {
    std::string target = options.control_observable;
    if (target.empty()) {
      for (const auto& o : observables) {
        if (o.name.rfind("re_u_at_", 0) == 0) {
          target = o.name;
          break;
        }
      }
      if (target.empty()) target = observables.front().name;
    }
    const std::size_t idx = find_observable(observables, target);
    std::vector<SpectralField> shifted = draw_mu(spec, n, rng.substream(2));
    for (auto& u : shifted) {
      u.coeffs().array() += options.control_shift;
      u = linear_flow(u, t);
    }
    rep.control_run = true;
    rep.control_description = "mu_k with every coefficient shifted by " + fmt(options.control_shift);
    rep.control_observable = target;
    rep.control_threshold = options.control_threshold;
    rep.control_results =
        compare_populations(observables, rep.reference_values, evaluate_panel(observables, shifted), options.significance);
    rep.control_detected = rep.control_results[idx].adjusted_p < options.control_threshold;
  }
  return rep;
}

StatReport run_gibbs_invariance(const MeasureSpec& spec, double t, std::size_t n,
                                const std::vector<Observable>& observables, const FlowConfig& cfg,
                                const RngStream& rng, const GibbsInvarianceOptions& options) {
  if (n < 500) throw PreconditionError("run_gibbs_invariance: at least 500 samples are required");
  if (observables.empty()) throw PreconditionError("run_gibbs_invariance: empty observable panel");
  FlowConfig flow = cfg;
  flow.horizon = t;
  if (t != 0.0) flow.validate();

  StatReport rep;
  rep.experiment = "gibbs-invariance";
  rep.k = spec.k();
  rep.weight = spec.weight().describe();
  rep.time = t;
  rep.flow = flow;
  rep.seed = rng.seed();
  rep.stream = rng.stream();
  rep.samples = n;
  rep.significance = options.significance;

  auto abort_if_excluded = [&](std::size_t excluded, const char* what) {
    if (static_cast<double>(excluded) > options.max_excluded_fraction * static_cast<double>(n)) {
      throw NumericalError(std::string("run_gibbs_invariance: ") + std::to_string(excluded) + " " + what +
                           " trajectories exceeded the drift tolerance");
    }
  };

  // Substreams: 0 reference, 1 evolved, 2 control initial data, 3 control reference.
  rep.reference_values = evaluate_panel(observables, draw_rho(spec, n, rng.substream(0), rep.proposals));
  const std::vector<SpectralField> initial = draw_rho(spec, n, rng.substream(1), rep.proposals);
  EvolvedBatch evolved = evolve_batch(initial, spec, t, flow);
  rep.excluded = evolved.excluded;
  rep.max_drift = evolved.max_drift;
  abort_if_excluded(evolved.excluded, "evolved");
  rep.evolved_values = evaluate_panel(observables, evolved.fields);
  rep.results = compare_populations(observables, rep.reference_values, rep.evolved_values, options.significance);
  rep.all_pass = std::all_of(rep.results.begin(), rep.results.end(), [](const auto& r) { return r.pass; });

  if (options.run_control) {
    const std::size_t idx = find_observable(observables, options.control_observable);
    const MeasureSpec strong =
        spec.with_weight(options.control_weight.value_or(WeightFunction::indicator({{-1.0, 1.0}}, 5.0)));
    EvolvedBatch control = evolve_batch(draw_mu(spec, n, rng.substream(2)), strong, t, flow);
    abort_if_excluded(control.excluded, "control");
    rep.control_run = true;
    rep.control_description = "mu_k (not reweighted) evolved under chi = " + strong.weight().describe();
    rep.control_observable = options.control_observable;
    rep.control_threshold = options.control_threshold;
    rep.control_results = compare_populations(observables, evaluate_panel(observables, draw_mu(spec, n, rng.substream(3))),
                                              evaluate_panel(observables, control.fields), options.significance);
    rep.control_detected = rep.control_results[idx].adjusted_p < options.control_threshold;
  }
  return rep;
}

MeanEstimate coupled_distance_diagnostic(int k, int k_ref, int samples, const RngStream& rng) {
  if (k < 1 || k_ref < k) throw PreconditionError("coupled_distance_diagnostic: need 1 <= k <= k'");
  if (samples < 2) throw PreconditionError("coupled_distance_diagnostic: need at least two samples");
  if (k == k_ref) return {0.0, 0.0, static_cast<std::size_t>(samples)};
  const FrequencyGrid wide_coarse(1 << k, k_ref);
  const FrequencyGrid coarse(1 << k, k);
  const FrequencyGrid fine(1 << k_ref, k_ref);
  std::vector<double> d(static_cast<std::size_t>(samples));
  parallel_for(d.size(), [&](std::size_t i) {
    RngStream s = rng.substream(i);
    const IncrementTable path = sample_increments(wide_coarse, s);
    const SpectralField fine_field = build_phi(refine_increments(path, FrequencyGrid(1 << k_ref, k_ref), s));
    IncrementTable restricted{coarse, Eigen::VectorXcd(coarse.mode_count())};
    for (int j = coarse.min_mode(); j <= coarse.max_mode(); ++j) restricted.increments[coarse.slot(j)] = path.at(j);
    d[i] = metric_d(embed(build_phi(restricted), fine), fine_field).value;
  });
  return mean_estimate(d);
}

}  // namespace kgibbs
