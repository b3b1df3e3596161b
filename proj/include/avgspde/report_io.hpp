#pragma once

// CSV tables, run manifests and atomic output writing.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "avgspde/config.hpp"
#include "avgspde/experiments.hpp"

namespace avgspde::io {

/// 17 significant digits, locale-independent; "nan" / "inf" for non-finite.
std::string format_double(double x);

std::string trajectory_csv(const Trajectory& tr, std::size_t coeffs = 0);
std::string convergence_csv(const ConvergenceReport& r);
std::string bifurcation_csv(const BifurcationReport& r);
std::string variance_csv(const ScalingReport& r);
std::string mixing_csv(const MixingReport& r);
std::string bench_csv(const BenchReport& r);
std::string gaussianity_csv(const GaussianityReport& r);
std::string audit_csv(const AuditReport& r);

struct OutputFile {
  std::string name;
  std::string content;
};

struct RunManifest {
  std::string subcommand;
  ExperimentConfig config;
  std::string version;
  std::string kernel;
  std::vector<std::string> files;
  std::vector<std::string> audit_warnings;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  int exit_status = 0;
  /// Only written when requested, so default manifests stay byte-stable.
  std::optional<std::pair<std::string, std::string>> timestamps;
};

std::string manifest_json(const RunManifest& m);

/// Writes every file, then manifest.json, each through a temporary file and
/// rename. The manifest's file list is filled in from `files`.
void write_outputs(const std::string& dir, const std::vector<OutputFile>& files, RunManifest manifest);

}  // namespace avgspde::io
