#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sgais/observations.hpp"
#include "sgais/sgais.hpp"

namespace sgais::cli {

inline constexpr std::string_view kTraceHeader =
    "n,log_z,log_z_per_n,anneal_steps,cum_wall_time_s,estimator,seed";

/// One line of a run trace. log_z_per_n == log_z / n.
struct TraceRow {
  std::uint64_t n = 0;
  double log_z = 0.0;
  double log_z_per_n = 0.0;
  std::uint64_t anneal_steps = 0;
  double cum_wall_time_s = 0.0;
  std::string estimator;
  std::uint64_t seed = 0;
};

TraceRow make_row(std::uint64_t n, double log_z, std::uint64_t anneal_steps, double cum_wall_time_s,
                  std::string estimator, std::uint64_t seed);

/// One row per chunk of an SGAIS run, with cumulative wall time.
std::vector<TraceRow> sgais_trace_rows(std::span<const AnnealRecord> records, std::uint64_t seed);

/// CSV text with the fixed header. Reals use 17 significant digits. With
/// `wall_time` false the cum_wall_time_s column is blanked, which is the form
/// compared for reproducibility.
std::string format_trace(std::span<const TraceRow> rows, bool wall_time = true);
void write_trace(const std::filesystem::path& path, std::span<const TraceRow> rows);
/// Throws FormatError on a header or field mismatch.
std::vector<TraceRow> parse_trace(std::string_view text, std::string_view origin = "<text>");
std::vector<TraceRow> read_trace(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

/// Stable identity of a dataset: model, size, seed and a hash of the values.
std::string dataset_id(const Dataset& dataset);

/// Run description stored next to every trace as line-delimited key=value text.
///
/// The content hash covers the configuration fields only; timestamps and output
/// paths are excluded, so equal hashes mean equal inputs.
struct RunManifest {
  std::vector<std::pair<std::string, std::string>> config;
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;

  void add(std::string key, std::string value) { config.emplace_back(std::move(key), std::move(value)); }
  std::string content_hash() const;
  std::string render() const;
  void write(const std::filesystem::path& path) const;
  static RunManifest parse(std::string_view text);
  static RunManifest read(const std::filesystem::path& path);
};

/// ISO-8601 UTC timestamp of the current time.
std::string utc_timestamp();

/// Manifest path paired with a trace path: "<stem>.manifest" in the same directory.
std::filesystem::path manifest_path_for(const std::filesystem::path& trace_path);

}  // namespace sgais::cli
