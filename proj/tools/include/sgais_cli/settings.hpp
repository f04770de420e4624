#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "sgais/baselines.hpp"
#include "sgais/sgais.hpp"

namespace sgais::cli {

/// Flat key=value settings with dotted sections.
///
///   # comment
///   run.seed = 7
///   [sgais]            # following keys are read as sgais.<key>
///   particles = 20
///
/// Later assignments win, so command-line overrides are applied with set().
class Settings {
 public:
  static Settings parse(std::string_view text, std::string_view origin = "<text>");
  static Settings load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  /// Parses a "key=value" override.
  void set_assignment(std::string_view assignment);
  void merge(const Settings& other);

  bool contains(const std::string& key) const { return values_.contains(key); }
  std::optional<std::string> find(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Throws UsageError naming the first key that no consumer understands.
  void check_known() const;

  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// SGAIS settings under "sgais." plus run.seed / run.threads.
EstimatorConfig estimator_config(const Settings& settings);

/// Default ais.lr. Tempered steps reach eta / lambda, and the unadjusted kernel's
/// stationary bias grows with the step, so AIS runs below the SGAIS rate.
inline constexpr double kAisLearningRate = 0.01;

/// AIS run settings: schedule and sampler under "ais." (eta derived as ais.lr / N).
struct AisSettings {
  std::size_t steps = 200;
  double shape = 4.0;
  baselines::AisOptions options;
};
AisSettings ais_settings(const Settings& settings, std::size_t observations);

/// Nested sampling settings under "ns.".
baselines::NsOptions ns_options(const Settings& settings);

/// Per-run timeout from run.timeout_s (default 600 s; 0 disables).
double run_timeout_seconds(const Settings& settings);

}  // namespace sgais::cli
