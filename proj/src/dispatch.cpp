#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "kgibbs/config.hpp"

#include "kgibbs/errors.hpp"
#include "kgibbs/parallel.hpp"

namespace kgibbs {

namespace {

namespace fs = std::filesystem;

std::vector<Observable> build_panel(const std::string& text, const MeasureSpec& spec) {
  if (text == "default") return default_panel(spec);
  std::vector<Observable> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    std::vector<std::string> parts;
    std::stringstream is(item);
    for (std::string p; std::getline(is, p, ':');) parts.push_back(p);
    try {
      if (parts.size() == 3 && parts[0] == "p") {
        out.push_back(seminorm_observable(std::stod(parts[1]), std::stod(parts[2])));
      } else if (parts.size() == 1 && parts[0] == "quartic") {
        out.push_back(quartic_observable(spec));
      } else if (parts.size() == 2 && parts[0] == "point") {
        out.push_back(point_value_observable(std::stod(parts[1])));
      } else if (parts.size() == 2 && parts[0] == "mode") {
        const int j = std::stoi(parts[1]);
        if (!spec.grid().contains_mode(j)) throw ConfigError("observables: mode " + parts[1] + " outside the band");
        out.push_back(mode_power_observable(j));
      } else if (parts.size() == 1 && parts[0] == "metric") {
        out.push_back(metric_observable());
      } else {
        throw ConfigError("observables: cannot parse '" + item + "'");
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("observables: cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("observables: empty panel");
  return out;
}

struct Artifacts {
  fs::path dir;
  std::string stem;
  std::vector<std::string> names;

  fs::path file(const std::string& suffix) {
    names.push_back(stem + suffix);
    return dir / names.back();
  }
};

int verdict(bool ok, std::ostream& log) {
  log << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? kExitOk : kExitAssertion;
}

}  // namespace

int dispatch(const ExperimentConfig& cfg, std::ostream& log) {
  set_default_workers(cfg.workers);
  const RngStream rng(cfg.seed, 0);
  Artifacts art{fs::path(cfg.out) / (cfg.command + "-seed" + std::to_string(cfg.seed)),
                cfg.command + "-seed" + std::to_string(cfg.seed), {}};
  const MeasureSpec spec(cfg.k, WeightFunction::parse(cfg.chi));
  int status = kExitOk;
  json report;

  if (cfg.command == "sample") {
    const auto n = static_cast<std::size_t>(cfg.n);
    report = {{"measure", cfg.measure}, {"samples", n}};
    if (cfg.measure == "increments") {
      std::vector<IncrementTable> tables;
      std::vector<std::uint64_t> ids;
      for (std::size_t i = 0; i < n; ++i) {
        RngStream s = rng.substream(i);
        tables.push_back(sample_increments(spec.grid(), s));
        ids.push_back(i);
      }
      write_csv(art.file("_increments.csv"), increments_table(tables, ids));
    } else {
      std::vector<SpectralField> fields;
      if (cfg.measure == "rho") {
        std::size_t proposals = 0;
        for (auto& g : sample_rho_k_batch(spec, n, rng)) {
          proposals += g.proposals;
          fields.push_back(std::move(g.field));
        }
        report["proposals"] = proposals;
        report["acceptance_rate"] = static_cast<double>(n) / static_cast<double>(proposals);
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          RngStream s = rng.substream(i);
          fields.push_back(sample_mu_k(spec, s));
        }
      }
      write_csv(art.file("_coefficients.csv"), coefficients_table(fields));
    }
    log << "wrote " << n << " samples\n";
  } else if (cfg.command == "evolve") {
    RngStream s = rng.substream(0);
    const SpectralField u0 = sample_rho_k(spec, s).field;
    FlowConfig flow{cfg.dt, cfg.t, cfg.drift_tol};
    flow.record_stride = std::max(1, static_cast<int>(std::lround(0.01 / cfg.dt)));
    const TrajectoryRecord rec = evolve_psi_k(u0, spec, flow);
    const EnergyReport energy = energy_monitor(rec, u0, spec);
    write_csv(art.file("_trajectory.csv"), trajectory_table(rec));
    write_csv(art.file("_energy.csv"), energy_table(energy));
    report = to_json(rec);
    report["energy_floor_holds"] = energy.floor_holds;
    log << "max relative drift " << rec.max_relative_drift << " after " << rec.halvings << " halvings\n";
    status = verdict(!rec.flagged && energy.floor_holds, log);
  } else if (cfg.command == "lin-invariance") {
    const StatReport rep =
        run_linear_invariance(spec, cfg.t, static_cast<std::size_t>(cfg.n), build_panel(cfg.observables, spec), rng);
    write_csv(art.file("_observables.csv"), observables_table(rep));
    report = to_json(rep);
    for (const auto& r : rep.results) log << r.name << " adjusted p = " << r.adjusted_p << '\n';
    status = verdict(rep.passed(), log);
  } else if (cfg.command == "gibbs-invariance") {
    GibbsInvarianceOptions opt;
    opt.control_weight = WeightFunction::parse(cfg.control_chi);
    opt.run_control = cfg.t != 0.0;
    FlowConfig flow{cfg.dt, cfg.t, cfg.drift_tol};
    const StatReport rep = run_gibbs_invariance(spec, cfg.t, static_cast<std::size_t>(cfg.n),
                                                build_panel(cfg.observables, spec), flow, rng, opt);
    write_csv(art.file("_observables.csv"), observables_table(rep));
    report = to_json(rep);
    for (const auto& r : rep.results) log << r.name << " adjusted p = " << r.adjusted_p << '\n';
    status = verdict(rep.passed(), log);
  } else if (cfg.command == "cauchy-rate") {
    const std::vector<int> levels = parse_int_list(cfg.levels, "levels");
    const CauchyRateReport rep = cauchy_rate(levels, cfg.fine_level, cfg.cutoff, cfg.probe, cfg.n, rng);
    report = to_json(rep);
    log << "slope " << rep.slope << '\n';
    status = verdict(std::abs(rep.slope + 1.0) <= 0.15, log);
  } else if (cfg.command == "tails") {
    const TailReport rep = tail_survival(spec, WeightFunction::parse(cfg.xi), cfg.p, cfg.r, {}, cfg.n, rng);
    report = to_json(rep);
    log << "quadratic rate " << rep.quadratic_rate << '\n';
    status = verdict(rep.monotone && rep.quadratic_rate > 0.0, log);
  } else if (cfg.command == "liouville") {
    RngStream s = rng.substream(0);
    const LiouvilleResult res = liouville_check(sample_mu_k(spec, s), spec, cfg.t, cfg.fd_step, cfg.dt);
    report = {{"t", cfg.t}, {"fd_step", cfg.fd_step}, {"determinant", res.determinant}, {"deviation", res.deviation},
              {"tolerance", cfg.tolerance}};
    log << "|det J - 1| = " << res.deviation << '\n';
    status = verdict(res.deviation <= cfg.tolerance, log);
  } else if (cfg.command == "picard") {
    json runs = json::array();
    bool ok = true;
    for (int d = 0; d < cfg.data; ++d) {
      RngStream s = rng.substream(static_cast<std::uint64_t>(d));
      const SpectralField u0 = sample_mu_k(spec, s);
      const PicardHorizon h = picard_horizon(u0, spec, cfg.horizon, 6, cfg.max_iter);
      json run = to_json(h);
      bool run_ok = h.monotone && h.contractive_horizon > 0.0;
      if (h.contractive_horizon > 0.0) {
        const PicardResult pr = picard_solve(u0, spec, h.contractive_horizon, cfg.max_iter);
        const SpectralField integrated =
            flow_map(u0, spec, h.contractive_horizon, cfg.dt) - linear_flow(u0, h.contractive_horizon);
        const double gap = full_domain_seminorm(pr.correction.back() - integrated, 1.0);
        run["integrator_gap"] = gap;
        run_ok = run_ok && gap <= 1e-6;
      }
      ok = ok && run_ok;
      runs.push_back(run);
    }
    report = {{"runs", runs}};
    status = verdict(ok, log);
  } else if (cfg.command == "converge-k") {
    const std::vector<int> ks = parse_int_list(cfg.ks, "ks");
    const int base = *std::min_element(ks.begin(), ks.end());
    const MeasureSpec base_spec(base, spec.weight());
    CsvTable table{{"datum", "k", "distance", "tail_bound"}, {}};
    bool ok = true;
    for (int d = 0; d < cfg.data; ++d) {
      RngStream s = rng.substream(static_cast<std::uint64_t>(d));
      const SpectralField u0 = sample_mu_k(base_spec, s);
      double prev = std::numeric_limits<double>::infinity();
      for (int k : ks) {
        const CrossKResult r = cross_k_convergence(u0, spec.weight(), k, cfg.k_ref, cfg.t, cfg.alpha, cfg.dt);
        table.rows.push_back({static_cast<double>(d), static_cast<double>(k), r.distance, r.tail_bound});
        if (!(r.distance < prev)) ok = false;
        prev = r.distance;
      }
    }
    write_csv(art.file("_distances.csv"), table);
    report = {{"monotone_for_every_datum", ok}};
    status = verdict(ok, log);
  }

  report["config"] = to_json(cfg);
  report["exit_status"] = status;
  write_json(art.file(".json"), report);
  write_manifest(art.dir, to_json(cfg), art.names);
  return status;
}

int run_cli(const std::vector<std::string>& args, std::ostream& log, std::ostream& err) {
  if (args.empty() || std::find(args.begin(), args.end(), "--help") != args.end() ||
      std::find(args.begin(), args.end(), "-h") != args.end()) {
    (args.empty() ? err : log) << usage();
    return args.empty() ? kExitConfig : kExitOk;
  }
  try {
    return dispatch(parse_config(args), log);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const PreconditionError& e) {
    err << "precondition violated: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace kgibbs
