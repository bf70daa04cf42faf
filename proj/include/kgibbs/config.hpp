#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "kgibbs/io.hpp"

namespace kgibbs {

/// One experiment. Every key can come from a key=value file (--config) or a
/// --key value flag; flags win.
struct ExperimentConfig {
  std::string command;
  int k = 3;
  std::string chi = "indicator(-1,1)";
  double t = 1.0;
  double dt = 1e-3;
  double horizon = 0.5;
  int n = 1000;
  std::uint64_t seed = 0;
  std::string out = "kgibbs-out";
  std::string observables = "default";
  int workers = 0;
  double drift_tol = 1e-8;
  std::string measure = "mu";
  std::string levels = "2,3,4,5,6";
  int fine_level = 9;
  int cutoff = 1;
  double probe = 0.0;
  int p = 2;
  int r = 2;
  std::string xi = "indicator(-1,1)";
  double fd_step = 1e-5;
  double tolerance = 1e-4;
  int k_ref = 6;
  std::string ks = "2,3,4,5";
  double alpha = 1.5;
  int data = 20;
  int max_iter = 60;
  std::string control_chi = "5*indicator(-1,1)";
};

inline constexpr const char* kCommands[] = {"sample",     "evolve",   "lin-invariance", "gibbs-invariance",
                                           "cauchy-rate", "tails",    "liouville",      "picard",
                                           "converge-k"};

/// Every accepted key, in documentation order.
const std::vector<std::string>& config_keys();

std::string usage();

/// Closest accepted key by edit distance.
std::string nearest_key(std::string_view key);

/// Parses argv-style arguments (without the program name). Throws
/// ConfigError for unknown or missing keys and values that fail validation.
ExperimentConfig parse_config(const std::vector<std::string>& args);

json to_json(const ExperimentConfig& cfg);

std::vector<int> parse_int_list(const std::string& text, const char* key);

/// Runs the experiment, writes artifacts under cfg.out, and returns 0 iff
/// its assertions pass (1 otherwise). Module errors propagate.
int dispatch(const ExperimentConfig& cfg, std::ostream& log);

enum ExitCode : int {
  kExitOk = 0,
  kExitAssertion = 1,
  kExitConfig = 2,
  kExitPrecondition = 3,
  kExitNumerical = 4,
  kExitIo = 5,
};

/// parse_config + dispatch with one exit code per error class; --help or -h
/// prints usage and returns 0.
int run_cli(const std::vector<std::string>& args, std::ostream& log, std::ostream& err);

}  // namespace kgibbs
