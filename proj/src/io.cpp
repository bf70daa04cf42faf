#include "kgibbs/io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "kgibbs/errors.hpp"

namespace kgibbs {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

json results_json(const std::vector<ObservableResult>& results) {
  json arr = json::array();
  for (const auto& r : results) {
    arr.push_back({{"observable", r.name},
                   {"ks_statistic", r.statistic},
                   {"p_value", r.p_value},
                   {"adjusted_p", r.adjusted_p},
                   {"n_reference", r.n_reference},
                   {"n_evolved", r.n_evolved},
                   {"pass", r.pass}});
  }
  return arr;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out = open_out(path);
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  char buf[32];
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      out << (i ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": missing header");
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream rs(line);
    for (std::string cell; std::getline(rs, cell, ',');) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError(path.string() + ": non-numeric cell '" + cell + "'");
      }
    }
    if (row.size() != t.header.size()) throw IoError(path.string() + ": ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable increments_table(std::span<const IncrementTable> tables, std::span<const std::uint64_t> streams) {
  if (tables.size() != streams.size()) throw PreconditionError("increments_table: one stream id per table");
  CsvTable t{{"stream", "index", "re", "im"}, {}};
  for (std::size_t s = 0; s < tables.size(); ++s) {
    const FrequencyGrid& g = tables[s].grid;
    for (int j = g.min_mode(); j <= g.max_mode(); ++j) {
      const auto d = tables[s].at(j);
      t.rows.push_back({static_cast<double>(streams[s]), static_cast<double>(j), d.real(), d.imag()});
    }
  }
  return t;
}

IncrementTable increments_from_table(const CsvTable& table, std::uint64_t stream, const FrequencyGrid& grid) {
  IncrementTable out{grid, Eigen::VectorXcd::Zero(grid.mode_count())};
  std::size_t seen = 0;
  for (const auto& row : table.rows) {
    if (static_cast<std::uint64_t>(row.at(0)) != stream) continue;
    const int j = static_cast<int>(row.at(1));
    if (!grid.contains_mode(j)) throw IoError("increment index outside the grid band");
    out.increments[grid.slot(j)] = {row.at(2), row.at(3)};
    ++seen;
  }
  if (seen != static_cast<std::size_t>(grid.mode_count())) throw IoError("increment table incomplete for stream");
  return out;
}

CsvTable coefficients_table(std::span<const SpectralField> fields) {
  CsvTable t{{"sample", "mode", "re", "im"}, {}};
  for (std::size_t s = 0; s < fields.size(); ++s) {
    const FrequencyGrid& g = fields[s].grid();
    for (int j = g.min_mode(); j <= g.max_mode(); ++j) {
      const auto c = fields[s].mode(j);
      t.rows.push_back({static_cast<double>(s), static_cast<double>(j), c.real(), c.imag()});
    }
  }
  return t;
}

CsvTable trajectory_table(const TrajectoryRecord& record) {
  CsvTable t{{"t", "H", "Hc", "Hp"}, {}};
  for (std::size_t i = 0; i < record.step_times.size(); ++i) {
    t.rows.push_back({record.step_times[i], record.total[i], record.kinetic[i], record.potential[i]});
  }
  return t;
}

CsvTable energy_table(const EnergyReport& report) {
  CsvTable t{{"t", "E", "kinetic_floor", "l6_integral", "l6_cubed_integral"}, {}};
  for (std::size_t i = 0; i < report.times.size(); ++i) {
    t.rows.push_back({report.times[i], report.energy[i], report.kinetic_floor[i], report.l6_integral[i],
                      report.l6_cubed_integral[i]});
  }
  return t;
}

CsvTable observables_table(const StatReport& report) {
  CsvTable t{{"observable", "population", "index", "value"}, {}};
  auto dump = [&](const std::vector<std::vector<double>>& values, double population) {
    for (std::size_t o = 0; o < values.size(); ++o) {
      for (std::size_t i = 0; i < values[o].size(); ++i) {
        t.rows.push_back({static_cast<double>(o), population, static_cast<double>(i), values[o][i]});
      }
    }
  };
  dump(report.reference_values, 0.0);
  dump(report.evolved_values, 1.0);
  return t;
}

json to_json(const FlowConfig& cfg) {
  return {{"dt", cfg.dt},
          {"horizon", cfg.horizon},
          {"integrator", "exponential-rk4"},
          {"drift_tolerance", cfg.drift_tolerance},
          {"max_halvings", cfg.max_halvings}};
}

json to_json(const StatReport& r) {
  json j = {{"experiment", r.experiment},
            {"k", r.k},
            {"weight", r.weight},
            {"t", r.time},
            {"seed", r.seed},
            {"stream", r.stream},
            {"samples", r.samples},
            {"significance", r.significance},
            {"correction", "bonferroni"}};
  if (r.flow) j["flow"] = to_json(*r.flow);
  j["observables"] = results_json(r.results);
  j["all_pass"] = r.all_pass;
  if (r.control_run) {
    j["negative_control"] = {{"description", r.control_description},
                             {"observable", r.control_observable},
                             {"threshold", r.control_threshold},
                             {"detected", r.control_detected},
                             {"observables", results_json(r.control_results)}};
  }
  j["excluded_trajectories"] = r.excluded;
  j["proposals"] = r.proposals;
  j["max_relative_drift"] = r.max_drift;
  j["passed"] = r.passed();
  return j;
}

json to_json(const CauchyRateReport& r) {
  return {{"levels", r.levels},         {"rms", r.rms},         {"std_error", r.std_error},
          {"fine_level", r.fine_level}, {"cutoff", r.cutoff},   {"probe", r.probe},
          {"samples", r.samples},       {"slope", r.slope},     {"intercept", r.intercept},
          {"rate_constant", r.rate_constant}};
}

json to_json(const MassProfile& p) {
  return {{"k", p.k},         {"radii", p.radii},         {"mean", p.mean},
          {"std_error", p.std_error}, {"slope", p.slope}, {"intercept", p.intercept},
          {"pointwise_variance", p.pointwise_variance}};
}

json to_json(const TailReport& r) {
  return {{"p", r.p},
          {"r", r.r},
          {"samples", r.samples},
          {"lambdas", r.lambdas},
          {"survival", r.survival},
          {"exceed", r.exceed},
          {"monotone", r.monotone},
          {"fit_points", r.fit_points},
          {"quadratic", {{"rate", r.quadratic_rate}, {"intercept", r.quadratic_intercept}, {"residual", r.quadratic_residual}}},
          {"linear", {{"rate", r.linear_rate}, {"intercept", r.linear_intercept}, {"residual", r.linear_residual}}}};
}

json to_json(const PicardHorizon& h) {
  return {{"horizons", h.horizons},
          {"contraction", h.contraction},
          {"converged", h.converged},
          {"monotone", h.monotone},
          {"contractive_horizon", h.contractive_horizon},
          {"lambda", h.lambda},
          {"epsilon", h.epsilon},
          {"constant", h.constant}};
}

json to_json(const TrajectoryRecord& r) {
  return {{"dt_used", r.dt_used},
          {"steps", r.steps},
          {"halvings", r.halvings},
          {"max_relative_drift", r.max_relative_drift},
          {"flagged", r.flagged},
          {"recorded_times", r.times}};
}

void write_json(const std::filesystem::path& path, const json& value) {
  std::ofstream out = open_out(path);
  out << value.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_manifest(const std::filesystem::path& dir, const json& config, const std::vector<std::string>& artifacts) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  write_json(dir / "manifest.json",
             {{"version", kVersion}, {"config", config}, {"artifacts", artifacts}, {"created", stamp}});
}

}  // namespace kgibbs
