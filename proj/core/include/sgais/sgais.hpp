#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sgais/execution.hpp"
#include "sgais/model.hpp"
#include "sgais/sghmc.hpp"

namespace sgais {

namespace data {
class DataStream;
}

/// M particles with their momenta and log importance weights.
struct ParticleEnsemble {
  std::vector<KineticState> particles;
  std::vector<double> log_weights;

  std::size_t size() const noexcept { return particles.size(); }
  /// log((1/M) sum_i w_i), the running evidence estimate.
  double log_evidence() const;
  /// (sum w)^2 / sum w^2 of the current weights.
  double weight_ess() const;
};

/// Draws M particles from the prior with zero log weights (w_i = 1).
ParticleEnsemble init_ensemble(const BayesModel& model, std::size_t particles,
                               std::span<RngStream> rngs);

/// One chunk's annealing path and the evidence after it.
struct AnnealRecord {
  std::size_t chunk_index = 0;     // 0-based
  std::size_t n_consumed = 0;      // observations consumed after this chunk
  std::vector<double> lambdas;     // strictly increasing, ends at exactly 1
  std::size_t steps = 0;           // == lambdas.size()
  double log_z_after = 0.0;
  double wall_time = 0.0;          // seconds spent on this chunk
};

enum class HistoryMode { kFull, kReservoir };

/// Observation count N in eta = learning_rate / N: the whole stream, or the rows
/// seen once the current chunk is absorbed.
enum class EtaScaling { kTotal, kRunning };

/// Resample before the MCMC update when the weight ESS drops below threshold * M.
struct ResamplingPolicy {
  bool enabled = false;
  double threshold = 0.5;
};

/// Tunables of the estimator. Defaults are the reference settings.
struct EstimatorConfig {
  std::size_t chunk_size = 500;
  std::size_t batch_size = 500;
  std::size_t particles = 10;
  double ess_target = 5.0;
  std::size_t burn_in_steps = 20;
  /// Per-observation learning rate; eta = learning_rate / N with N chosen by eta_scaling.
  double learning_rate = 0.1;
  /// Overrides the derived eta when set.
  std::optional<double> eta;
  double alpha = 0.2;
  double beta_hat = 0.0;
  ResamplingPolicy resampling;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t max_anneal_steps = 10000;
  HistoryMode history = HistoryMode::kFull;
  EtaScaling eta_scaling = EtaScaling::kRunning;
  std::size_t reservoir_capacity = 100000;

  /// Throws UsageError on inconsistent values.
  void validate() const;
  /// SGHMC constants for a dataset of `total_observations` rows.
  SghmcParams sghmc_for(std::size_t total_observations) const;
};

/// ESS(delta) = (sum w)^2 / sum w^2 with w_i = exp(delta * log_incr_i), in log space.
double incremental_ess(std::span<const double> log_incr, double delta);

/// Largest admissible annealing increment: 1 - lambda when ESS(1 - lambda) already
/// meets the target, otherwise the root of ESS(delta) = ess_target found by bisection
/// to 1e-10 in delta.
double solve_annealing_step(std::span<const double> log_incr, double lambda, double ess_target);

/// log w_i += delta * log_incr_i.
void update_log_weights(ParticleEnsemble& ensemble, std::span<const double> log_incr,
                        double delta);

/// Systematic resampling against the normalized weights. All log weights become
/// log_mean_exp(old), so the evidence estimate is unchanged. Returns the selected
/// ancestor indices. Throws DegenerateEnsembleError when every weight is zero.
std::vector<std::size_t> systematic_resample(ParticleEnsemble& ensemble, RngStream& rng);

/// Everything one chunk update needs besides the ensemble.
struct ChunkContext {
  const BayesModel* model = nullptr;
  ObsView chunk;
  ObsView history;     // pool for historical mini-batches
  std::size_t n_prev = 0;
  std::size_t chunk_index = 0;
  SghmcParams sghmc;
};

/// Per-particle streams and scratch owned by a run.
struct ParticleWorkspace {
  std::vector<RngStream> rngs;
  std::vector<SghmcScratch> scratch;
  RngStream resample_rng{0, streams::kResample};
  std::vector<double> log_incr;

  ParticleWorkspace(std::uint64_t seed, std::size_t particles);
};

/// Anneals one chunk in from lambda = 0 to 1 (the inner loop of the estimator).
AnnealRecord sgais_chunk_update(ParticleEnsemble& ensemble, const ChunkContext& ctx,
                                const EstimatorConfig& config, ParticleWorkspace& work);

struct SgaisResult {
  std::vector<AnnealRecord> trace;
  ParticleEnsemble ensemble;
  double log_z = 0.0;
};

struct RunHooks {
  /// Called after every chunk (e.g. to stream trace rows).
  std::function<void(const AnnealRecord&)> on_chunk;
  Deadline deadline;
};

/// Online evidence estimation over a chunked stream.
SgaisResult sgais_run(const BayesModel& model, data::DataStream& stream,
                      const EstimatorConfig& config, const RunHooks& hooks = {});

}  // namespace sgais
