#pragma once

// Static SVG line/scatter plots of the report tables.

#include <string>
#include <vector>

#include "avgspde/experiments.hpp"

namespace avgspde::svg {

struct Series {
  enum class Style { Line, Circles, Crosses };
  std::string label;
  std::vector<double> x, y;
  Style style = Style::Line;
  std::string color = "#1f77b4";
};

struct Plot {
  std::string title, xlabel, ylabel;
  bool logx = false, logy = false;
  std::vector<Series> series;
  std::vector<double> vlines;  // dashed vertical markers
};

/// Non-finite points (and non-positive ones on log axes) are skipped.
std::string render(const Plot& p);

std::string trajectory_plot(const Trajectory& tr, const std::string& title);
std::string convergence_plot(const ConvergenceReport& r);
std::string bifurcation_plot(const BifurcationReport& r);
std::string variance_plot(const ScalingReport& r);
std::string mixing_plot(const MixingReport& r);
std::string bench_plot(const BenchReport& r);
std::string gaussianity_plot(const GaussianityReport& r);

}  // namespace avgspde::svg
