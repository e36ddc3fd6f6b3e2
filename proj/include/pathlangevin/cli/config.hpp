#pragma once

#include "pathlangevin/diagnostics.hpp"
#include "pathlangevin/model.hpp"
#include "pathlangevin/sampler.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathlangevin::cli {

/// Schema or value error in a configuration file; the message carries
/// "file:line:" when the offending node is known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemSettings {
  std::string kind = "bridge";
  int dim = 1;
  Matrix A;
  Matrix B;
  Vector start;
  Vector end;
  Matrix A21;
  Matrix B11;
  Matrix B22;
  /// Observation CSV, relative to the config file.
  std::string observations;
  std::string log_alpha = "stationary";
  Matrix alpha_precision;
};

struct PotentialSettings {
  std::string kind = "quadratic";
  double a = 1.0;
  double b = 1.0;
  Matrix Q;
};

struct OracleSettings {
  std::string method = "importance";
  long samples = 10000;
  double tolerance = 0.05;
  int substeps = 1;
  double mala_step = 0.0;
  long mala_steps = 100000;
  long mala_burn_in = -1;
  long mala_thin = 1;
  int mala_chains = 1;
};

struct RunSettings {
  std::uint64_t seed = 0;
  int chains = 1;
  bool strict = false;
  std::vector<int> marginal_nodes;
};

/// Everything a config file can say, with defaults resolved.
struct Settings {
  ProblemSettings problem;
  PotentialSettings potential;
  int intervals = 32;
  SamplerConfig sampler;
  OracleSettings oracle;
  RunSettings run;
  GateConfig gates;
};

bool operator==(const Settings& a, const Settings& b);

struct RunPlan {
  Settings settings;
  ProblemSpec spec;
  Grid grid;
  /// Directory the config was read from; observation paths resolve here.
  std::string base_dir;
};

/// Reads and validates a TOML config. Unknown keys are rejected with a
/// suggestion for the intended key.
RunPlan parse_config(const std::string& path);
RunPlan parse_config_string(const std::string& text, const std::string& base_dir = ".",
                            const std::string& source_name = "config");

/// Canonical TOML for the settings; parses back to an equal plan.
std::string to_toml(const Settings& settings);

/// Builds the problem described by the settings.
ProblemSpec build_problem(const Settings& settings, const Grid& grid,
                          const std::string& base_dir);

/// Closest known key by synonym table or edit distance, or "".
std::string suggest_key(const std::string& key, const std::vector<std::string>& allowed);

}  // namespace pathlangevin::cli
