#include "kgibbs/config.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "CLI11.hpp"
#include "kgibbs/errors.hpp"
#include "kgibbs/weight.hpp"

namespace kgibbs {

namespace {

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

[[noreturn]] void unknown_key(const std::string& key) {
  throw ConfigError("unknown key '" + key + "'; did you mean '" + nearest_key(key) + "'?");
}

void bind_options(CLI::App& app, ExperimentConfig& c) {
  app.add_option("command", c.command, "experiment to run");
  app.add_option("--k", c.k, "truncation level, N_k = 2^k, R_k = k");
  app.add_option("--chi", c.chi, "localizer descriptor");
  app.add_option("--t", c.t, "evolution time");
  app.add_option("--dt", c.dt, "integrator step");
  app.add_option("--horizon", c.horizon, "largest Picard horizon");
  app.add_option("--n", c.n, "sample count");
  app.add_option("--seed", c.seed, "RNG seed");
  app.add_option("--out", c.out, "output directory");
  app.add_option("--observables", c.observables, "observable panel");
  app.add_option("--workers", c.workers, "worker threads (0 = all cores)");
  app.add_option("--drift_tol", c.drift_tol, "relative H_k drift tolerance");
  app.add_option("--measure", c.measure, "sample: mu, rho or increments");
  app.add_option("--levels", c.levels, "cauchy-rate coarse levels");
  app.add_option("--fine_level", c.fine_level, "cauchy-rate fine level");
  app.add_option("--cutoff", c.cutoff, "cauchy-rate frequency cutoff R");
  app.add_option("--probe", c.probe, "cauchy-rate probe point");
  app.add_option("--p", c.p, "tails: spatial exponent");
  app.add_option("--r", c.r, "tails: time exponent");
  app.add_option("--xi", c.xi, "tails: weight descriptor");
  app.add_option("--fd_step", c.fd_step, "liouville: finite-difference step");
  app.add_option("--tolerance", c.tolerance, "liouville: bound on |det J - 1|");
  app.add_option("--k_ref", c.k_ref, "converge-k: reference level");
  app.add_option("--ks", c.ks, "converge-k: levels compared against k_ref");
  app.add_option("--alpha", c.alpha, "converge-k: spatial weight exponent");
  app.add_option("--data", c.data, "converge-k / picard: number of initial data");
  app.add_option("--max_iter", c.max_iter, "picard: iteration cap");
  app.add_option("--control_chi", c.control_chi, "gibbs-invariance: control localizer");
}

template <class T>
void require(bool ok, const T& message) {
  if (!ok) throw ConfigError(message);
}

void validate(const ExperimentConfig& c) {
  require(!c.command.empty(), "missing required key 'command'");
  require(std::find(std::begin(kCommands), std::end(kCommands), c.command) != std::end(kCommands),
          "unknown command '" + c.command + "'");
  require(c.k >= 1 && c.k <= 8, "k must lie in the supported range [1, 8]");
  for (const auto& [key, text] : {std::pair{"chi", c.chi}, std::pair{"xi", c.xi}, std::pair{"control_chi", c.control_chi}}) {
    try {
      (void)WeightFunction::parse(text);
    } catch (const InvalidWeightError& e) {
      throw ConfigError(std::string("invalid ") + key + ": " + e.what());
    }
  }
  require(c.dt > 0.0, "dt must be positive");
  require(c.horizon > 0.0, "horizon must be positive");
  require(c.n > 0, "n must be positive");
  require(c.workers >= 0, "workers must be >= 0");
  require(c.drift_tol > 0.0, "drift_tol must be positive");
  require(c.measure == "mu" || c.measure == "rho" || c.measure == "increments",
          "measure must be one of mu, rho, increments");
  require(c.fine_level >= 0 && c.fine_level <= 14, "fine_level must lie in [0, 14]");
  require(c.cutoff >= 1, "cutoff must be >= 1");
  require(c.p >= 1 && c.r >= 1, "p and r must be >= 1");
  require(c.fd_step > 0.0, "fd_step must be positive");
  require(c.tolerance > 0.0, "tolerance must be positive");
  require(c.k_ref >= 1 && c.k_ref <= 8, "k_ref must lie in [1, 8]");
  require(c.alpha > 0.5, "alpha must exceed 1/2");
  require(c.data >= 1, "data must be >= 1");
  require(c.max_iter >= 1, "max_iter must be >= 1");
  (void)parse_int_list(c.levels, "levels");
  for (int k : parse_int_list(c.ks, "ks")) require(k >= 1 && k <= c.k_ref, "ks entries must lie in [1, k_ref]");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    ExperimentConfig scratch;
    CLI::App app;
    bind_options(app, scratch);
    std::vector<std::string> out;
    for (const CLI::Option* opt : app.get_options()) {
      const std::string name = opt->get_name(false, true);
      if (name.empty() || name == "--help") continue;
      out.push_back(name.rfind("--", 0) == 0 ? name.substr(2) : name);
    }
    out.push_back("config");
    return out;
  }();
  return keys;
}

std::string usage() {
  ExperimentConfig scratch;
  CLI::App app{"kgibbs <command> --seed S [--key value ...] [--config file]"};
  bind_options(app, scratch);
  app.set_config("--config", "", "key=value file");
  std::string commands = "commands:";
  for (const char* c : kCommands) commands += std::string(" ") + c;
  app.footer(commands);
  return app.help();
}

std::string nearest_key(std::string_view key) {
  const auto& keys = config_keys();
  return *std::min_element(keys.begin(), keys.end(), [key](const std::string& a, const std::string& b) {
    return edit_distance(key, a) < edit_distance(key, b);
  });
}

std::vector<int> parse_int_list(const std::string& text, const char* key) {
  std::vector<int> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string(key) + ": '" + item + "' is not an integer");
    }
  }
  if (out.empty()) throw ConfigError(std::string(key) + ": empty list");
  return out;
}

ExperimentConfig parse_config(const std::vector<std::string>& args) {
  ExperimentConfig cfg;
  CLI::App app{"kgibbs"};
  app.allow_extras();
  bind_options(app, cfg);
  std::string config_path;
  std::vector<std::string> reversed(args.rbegin(), args.rend());

  // Keys in the file are checked here so a misspelling names its neighbour.
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") config_path = args[i + 1];
  }
  if (!config_path.empty()) {
    if (!std::filesystem::exists(config_path)) throw ConfigError("config file '" + config_path + "' does not exist");
    const auto& keys = config_keys();
    try {
      for (const CLI::ConfigItem& item : CLI::ConfigTOML().from_file(config_path)) {
        if (std::find(keys.begin(), keys.end(), item.name) == keys.end()) unknown_key(item.name);
      }
    } catch (const CLI::ParseError& e) {
      throw ConfigError(std::string("config file: ") + e.what());
    }
  }
  app.set_config("--config", "", "key=value file");

  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }
  for (const std::string& extra : app.remaining()) {
    if (extra.rfind("--", 0) == 0) unknown_key(extra.substr(2));
    throw ConfigError("unexpected argument '" + extra + "'");
  }
  if (app.count("--seed") == 0 && (config_path.empty() || cfg.seed == 0)) {
    throw ConfigError("missing required key 'seed'");
  }
  validate(cfg);
  return cfg;
}

json to_json(const ExperimentConfig& c) {
  return {{"command", c.command},     {"k", c.k},
          {"chi", c.chi},             {"t", c.t},
          {"dt", c.dt},               {"horizon", c.horizon},
          {"n", c.n},                 {"seed", c.seed},
          {"out", c.out},             {"observables", c.observables},
          {"workers", c.workers},     {"drift_tol", c.drift_tol},
          {"measure", c.measure},     {"levels", c.levels},
          {"fine_level", c.fine_level}, {"cutoff", c.cutoff},
          {"probe", c.probe},         {"p", c.p},
          {"r", c.r},                 {"xi", c.xi},
          {"fd_step", c.fd_step},     {"tolerance", c.tolerance},
          {"k_ref", c.k_ref},         {"ks", c.ks},
          {"alpha", c.alpha},         {"data", c.data},
          {"max_iter", c.max_iter},   {"control_chi", c.control_chi}};
}

}  // namespace kgibbs
