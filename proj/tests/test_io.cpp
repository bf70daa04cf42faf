#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "kgibbs/errors.hpp"
#include "kgibbs/io.hpp"

using namespace kgibbs;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("kgibbs-io-" + std::to_string(std::rand()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("csv round trip is exact") {
  TempDir dir;
  CsvTable t{{"a", "b"}, {{0.1, 1.0 / 3.0}, {-1e-300, 12345.678901234567}}};
  write_csv(dir.path / "t.csv", t);
  const CsvTable back = read_csv(dir.path / "t.csv");
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK_THROWS_AS(read_csv(dir.path / "missing.csv"), IoError);
}

TEST_CASE("increment tables survive serialization") {
  TempDir dir;
  const FrequencyGrid g(4, 2);
  RngStream r0(1, 0), r1(1, 1);
  const std::vector<IncrementTable> tables{sample_increments(g, r0), sample_increments(g, r1)};
  const std::vector<std::uint64_t> streams{0, 1};
  write_csv(dir.path / "inc.csv", increments_table(tables, streams));
  const CsvTable back = read_csv(dir.path / "inc.csv");
  CHECK(increments_from_table(back, 1, g).increments == tables[1].increments);
  CHECK(increments_from_table(back, 0, g).increments == tables[0].increments);
}

TEST_CASE("tables have the documented columns") {
  const MeasureSpec s(1, WeightFunction::indicator({{-1.0, 1.0}}));
  RngStream r(2, 0);
  const SpectralField u = sample_mu_k(s, r);
  const std::vector<SpectralField> fields{u};
  const CsvTable c = coefficients_table(fields);
  CHECK(c.rows.size() == static_cast<std::size_t>(s.grid().mode_count()));
  const TrajectoryRecord rec = evolve_psi_k(u, s, FlowConfig{1e-2, 0.1});
  const CsvTable tr = trajectory_table(rec);
  CHECK(tr.header == std::vector<std::string>{"t", "H", "Hc", "Hp"});
  CHECK(tr.rows.size() == rec.total.size());
}

TEST_CASE("json and manifest") {
  TempDir dir;
  const json j = to_json(FlowConfig{});
  CHECK(j.at("dt").get<double>() == 1e-3);
  write_json(dir.path / "x.json", j);
  CHECK(read_json(dir.path / "x.json") == j);

  write_manifest(dir.path, json{{"seed", 7}}, {"x.json"});
  const json m = read_json(dir.path / "manifest.json");
  CHECK(m.at("version") == kVersion);
  CHECK(m.at("config").at("seed") == 7);
  CHECK(m.at("artifacts").at(0) == "x.json");
  CHECK(m.contains("created"));
  CHECK_THROWS_AS(read_json(dir.path / "nope.json"), IoError);
}
