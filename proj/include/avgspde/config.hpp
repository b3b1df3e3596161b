#pragma once

// Flat key=value experiment configuration.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace avgspde {

struct ExperimentConfig {
  std::string subcommand = "simulate";

  // problem
  double L = 1.0;
  std::size_t N = 16;
  double epsilon = 0.1;
  std::vector<double> epsilons;
  std::vector<double> L_grid;
  double sigma1 = 0.0;
  double sigma2 = 3.0;
  std::string q1_kind = "resolvent";
  double q1_power = 1.0;
  std::string q2_kind = "resolvent";
  double q2_power = 1.0;
  std::string f = "fhn_slow";
  std::string g = "fhn_fast";
  double u0_amp = 0.0;
  std::size_t u0_mode = 1;
  std::string v0 = "zero";
  std::string scheme = "auto";

  // run
  double T = 6.0;
  double dt = 1e-3;
  double dt_surrogate = 0.02;
  double t_burn = 0.0;
  std::size_t replicas = 1;
  std::size_t stride = 1;
  std::size_t coeffs = 0;
  double kappa = 0.05;
  std::uint64_t seed = 1;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"simulate",    "average",  "deviation", "convergence", "bifurcation",
                                          "variance",    "mixing",   "benchmark", "gaussianity", "audit"};
  return s;
}

bool is_subcommand(std::string_view name);

/// Defaults for a subcommand (the documented table).
ExperimentConfig default_config(const std::string& subcommand);

/// Keys accepted in files and as --KEY overrides, in canonical order.
const std::vector<std::string>& config_keys();

/// Sets one key from text. Throws ParameterError naming the key on a bad
/// or out-of-range value, or on an unknown key.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const ExperimentConfig& cfg, const std::string& key);

/// Cross-field checks (t_burn < T, u0_mode <= N, ...).
void validate_config(const ExperimentConfig& cfg);

/// Reads `path` (key=value text, or a run manifest JSON) on top of the
/// subcommand defaults, then applies overrides. An empty path means defaults
/// only. Errors carry "path:line:" prefixes.
ExperimentConfig parse_config(const std::string& path, const std::string& subcommand,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Canonical key=value text, one key per line in config_keys() order.
std::string serialize_config(const ExperimentConfig& cfg);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Shortest round-trip decimal text of a double.
std::string format_shortest(double x);

}  // namespace avgspde
