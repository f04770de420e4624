#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sgais/baselines.hpp"
#include "sgais/model.hpp"
#include "sgais/observations.hpp"
#include "sgais_cli/settings.hpp"
#include "sgais_cli/trace.hpp"

namespace sgais::cli {

/// Builds a dataset. `kind` is a model id understood by make_model (true parameters
/// drawn from its prior) or "gmm-shift" (n must divide 100000 evenly into the
/// 1:9:90 phase layout).
Dataset make_dataset(std::string_view kind, std::size_t n, std::uint64_t seed);

/// Closed-form log evidence when the model has one, NaN otherwise.
double exact_log_evidence(const BayesModel& model, const ObsView& data);

struct GenerateArgs {
  std::string kind;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  bool force = false;
  bool text = false;  // also write "<out>.txt"
};
/// Throws UsageError when `out` exists and `force` is not set.
Dataset cmd_generate(const GenerateArgs& args);

/// Outcome of one estimator run. SGAIS rows are per chunk; AIS and NS produce one row.
struct EstimatorRun {
  std::vector<TraceRow> rows;
  double log_z = 0.0;
  double wall_time_s = 0.0;
  std::vector<baselines::NsIteration> ns_iterations;
};

/// Runs "sgais", "ais" or "ns" on an in-memory dataset. Rows collected before a
/// divergence or timeout are kept in `partial` when given.
EstimatorRun run_estimator(std::string_view estimator, const BayesModel& model, const Dataset& data,
                           const Settings& settings, std::vector<TraceRow>* partial = nullptr);

/// Manifest fields for a run: estimator, model, dataset identity and the effective
/// settings of that estimator.
RunManifest describe_run(std::string_view estimator, const BayesModel& model,
                         const std::string& dataset_identity, std::size_t observations,
                         const Settings& settings);

/// FNV-1a of a file's bytes, read in blocks.
std::string file_hash(const std::filesystem::path& path);

struct RunArgs {
  std::string estimator;
  std::filesystem::path dataset;
  std::string model;  // empty: the dataset header's model
  Settings settings;
  std::filesystem::path out;
  bool stream = false;  // SGAIS reads chunks from the file instead of loading it
};
struct RunOutcome {
  EstimatorRun run;
  RunManifest manifest;
};
/// Writes the trace CSV and "<out stem>.manifest" (plus "<out stem>.ns.csv" for NS).
/// On divergence or timeout a diagnostic row (log_z = nan) is written before rethrowing.
RunOutcome cmd_run(const RunArgs& args);

struct ShiftDemoArgs {
  std::filesystem::path out_dir;
  Settings settings;
  std::size_t scale_down = 1;
  std::uint64_t seed = 0;
  std::vector<std::size_t> components{3, 5, 7};
};
struct ShiftDemoRun {
  std::size_t components = 0;
  bool shuffled = false;
  std::vector<TraceRow> rows;
  double log_z = 0.0;
};
struct ShiftDemoResult {
  std::vector<ShiftDemoRun> runs;
  std::vector<std::uint64_t> phase_boundaries;
};
ShiftDemoResult cmd_shift_demo(const ShiftDemoArgs& args, std::ostream* log = nullptr);

struct BenchArgs {
  std::filesystem::path out_dir;
  std::vector<std::string> models{"linreg", "logreg", "gmm"};
  std::vector<std::size_t> grid{1000, 3000, 10000, 30000, 100000};
  std::vector<std::string> estimators{"sgais", "ns", "ais"};
  Settings settings;
  std::uint64_t seed = 0;
  /// Adds max(grid) / 4 to the NS and AIS sizes so a 4x pair exists.
  bool quarter_point = true;
};
struct BenchCell {
  std::string model;
  std::string estimator;
  std::size_t n = 0;
  double log_z = 0.0;
  double exact_log_z = 0.0;  // NaN when unknown
  double wall_time_s = 0.0;
  std::string status;        // ok | timeout | diverged
  std::uint64_t seed = 0;
};
struct BenchResult {
  std::vector<BenchCell> cells;
  std::map<std::string, std::vector<TraceRow>> sgais_traces;  // by model
};
inline constexpr std::string_view kBenchHeader =
    "model,estimator,n,log_z,log_z_per_n,exact_log_z_per_n,wall_time_s,status,seed";
BenchResult cmd_bench(const BenchArgs& args, std::ostream* log = nullptr);

struct SweepArgs {
  std::string parameter;  // M | ess_target | burn_in | lr | lr_burnin_product | batch_size
  std::vector<double> values;
  std::filesystem::path out_dir;
  Settings settings;
  std::size_t seeds = 1;
  std::string model = "gmm";
  std::size_t n = 10000;
  std::uint64_t data_seed = 0;
};
struct SweepPoint {
  double value = 0.0;
  std::uint64_t seed = 0;
  double log_z = 0.0;
  double log_z_per_n = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t anneal_steps = 0;      // total over chunks
  std::uint64_t max_chunk_steps = 0;
  std::uint64_t min_chunk_steps = 0;
  std::string status;
};
inline constexpr std::string_view kSweepHeader =
    "parameter,value,seed,log_z,log_z_per_n,wall_time_s,anneal_steps,min_chunk_steps,max_chunk_steps,status";
/// Settings for one sweep value: the swept key(s) replaced, the rest untouched.
Settings sweep_settings(const Settings& base, std::string_view parameter, double value);
std::vector<SweepPoint> cmd_sweep(const SweepArgs& args, std::ostream* log = nullptr);

struct PlotArgs {
  std::vector<std::filesystem::path> traces;
  std::filesystem::path out;
  std::string metric = "log_z_per_n";  // log_z | log_z_per_n | anneal_steps | cum_wall_time_s
  std::string title;
};
/// Rows are grouped per file and estimator; groups with several seeds become
/// median lines with min-max bands.
void cmd_plot(const PlotArgs& args);

}  // namespace sgais::cli
