#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sgais::cli {

/// A polyline, optionally with a shaded [lo, hi] band at the same x positions.
/// A series with a single point is drawn as a marker.
struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> lo;  // empty or same length as x
  std::vector<double> hi;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  /// Unset: logarithmic when all x are positive and span at least two decades.
  std::optional<bool> log_x;
  std::optional<bool> log_y;
  std::vector<Series> series;
};

/// Deterministic SVG rendering. Throws UsageError when no series has a finite point.
std::string render_svg(const Chart& chart);
/// Renders first, so nothing is written on error.
void write_svg(const std::filesystem::path& path, const Chart& chart);

}  // namespace sgais::cli
