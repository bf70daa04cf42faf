#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "kgibbs/dynamics.hpp"
#include "kgibbs/invariance.hpp"
#include "kgibbs/measures.hpp"
#include "kgibbs/random_field.hpp"

namespace kgibbs {

using json = nlohmann::ordered_json;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Numbers are written with %.17g so a read reproduces them bit for bit.
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// Columns: stream, index, re, im.
CsvTable increments_table(std::span<const IncrementTable> tables, std::span<const std::uint64_t> streams);
/// Rebuilds the tables of one stream on the given grid.
IncrementTable increments_from_table(const CsvTable& table, std::uint64_t stream, const FrequencyGrid& grid);

/// Columns: sample, mode, re, im.
CsvTable coefficients_table(std::span<const SpectralField> fields);
/// Columns: t, H, Hc, Hp, per integrator step.
CsvTable trajectory_table(const TrajectoryRecord& record);
/// Columns: t, E, kinetic_floor, l6_integral, l6_cubed_integral.
CsvTable energy_table(const EnergyReport& report);
/// Columns: observable, population (0 reference, 1 evolved), index, value.
CsvTable observables_table(const StatReport& report);

json to_json(const FlowConfig& cfg);
json to_json(const StatReport& report);
json to_json(const CauchyRateReport& report);
json to_json(const MassProfile& profile);
json to_json(const TailReport& report);
json to_json(const PicardHorizon& horizon);
json to_json(const TrajectoryRecord& record);

void write_json(const std::filesystem::path& path, const json& value);
json read_json(const std::filesystem::path& path);

/// manifest.json: config echo, artifact list and library version; the
/// wall-clock stamp lives under "created" and nowhere else.
void write_manifest(const std::filesystem::path& dir, const json& config, const std::vector<std::string>& artifacts);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kgibbs
