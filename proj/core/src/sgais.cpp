#include "sgais/sgais.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sgais/data.hpp"
#include "sgais/errors.hpp"
#include "sgais/numeric.hpp"

namespace sgais {

double ParticleEnsemble::log_evidence() const { return log_mean_exp(log_weights); }

double ParticleEnsemble::weight_ess() const {
  std::vector<double> doubled(log_weights.size());
  std::transform(log_weights.begin(), log_weights.end(), doubled.begin(),
                 [](double w) { return 2.0 * w; });
  const double ess = std::exp(2.0 * log_sum_exp(log_weights) - log_sum_exp(doubled));
  return std::clamp(ess, 1.0, static_cast<double>(log_weights.size()));
}

ParticleEnsemble init_ensemble(const BayesModel& model, std::size_t particles,
                               std::span<RngStream> rngs) {
  if (rngs.size() < particles) throw UsageError("init_ensemble: not enough random streams");
  ParticleEnsemble ensemble;
  ensemble.particles.reserve(particles);
  for (std::size_t i = 0; i < particles; ++i) {
    ParamVector theta = model.sample_prior(rngs[i]);
    ensemble.particles.push_back({theta, ParamVector::Zero(theta.size())});
  }
  ensemble.log_weights.assign(particles, 0.0);
  return ensemble;
}

void EstimatorConfig::validate() const {
  if (chunk_size == 0) throw UsageError("config: chunk_size must be positive");
  if (batch_size == 0) throw UsageError("config: batch_size must be positive");
  if (particles < 2) throw UsageError("config: need at least 2 particles");
  if (!(ess_target >= 1.0) || ess_target > static_cast<double>(particles)) {
    throw UsageError("config: ess_target must lie in [1, particles]");
  }
  if (burn_in_steps == 0) throw UsageError("config: burn_in_steps must be positive");
  if (eta.has_value()) {
    if (!(*eta > 0.0)) throw UsageError("config: eta must be positive");
  } else if (!(learning_rate > 0.0)) {
    throw UsageError("config: learning_rate must be positive");
  }
  SghmcParams{1.0, alpha, beta_hat}.validate();
  if (resampling.enabled && !(resampling.threshold > 0.0 && resampling.threshold <= 1.0)) {
    throw UsageError("config: resampling threshold must lie in (0, 1]");
  }
  if (threads == 0) throw UsageError("config: threads must be positive");
  if (max_anneal_steps == 0) throw UsageError("config: max_anneal_steps must be positive");
  if (reservoir_capacity == 0) throw UsageError("config: reservoir_capacity must be positive");
}

SghmcParams EstimatorConfig::sghmc_for(std::size_t total_observations) const {
  SghmcParams p;
  p.eta = eta.value_or(learning_rate / static_cast<double>(std::max<std::size_t>(1, total_observations)));
  p.alpha = alpha;
  p.beta_hat = beta_hat;
  return p;
}

double incremental_ess(std::span<const double> log_incr, double delta) {
  if (log_incr.empty()) throw UsageError("incremental_ess: empty input");
  if (!(delta >= 0.0)) throw UsageError("incremental_ess: delta must be nonnegative");
  const auto m = static_cast<double>(log_incr.size());
  if (delta == 0.0) return m;
  const double top = delta * *std::max_element(log_incr.begin(), log_incr.end());
  if (!std::isfinite(top)) throw NumericError("incremental_ess: non-finite increment", 0);
  // Shifted by the largest term so equal increments give exactly M.
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double l : log_incr) {
    const double w = std::exp(delta * l - top);
    sum += w;
    sum_sq += w * w;
  }
  const double ess = sum * sum / sum_sq;
  return std::clamp(ess, 1.0, m);
}

double solve_annealing_step(std::span<const double> log_incr, double lambda, double ess_target) {
  if (log_incr.empty()) throw UsageError("solve_annealing_step: empty input");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw UsageError("solve_annealing_step: lambda outside [0, 1)");
  if (!(ess_target >= 1.0) || ess_target > static_cast<double>(log_incr.size())) {
    throw UsageError("solve_annealing_step: target ESS " + std::to_string(ess_target) +
                     " outside [1, " + std::to_string(log_incr.size()) + "]");
  }
  const double remaining = 1.0 - lambda;
  if (incremental_ess(log_incr, remaining) >= ess_target) return remaining;
  double lo = 0.0;
  double hi = remaining;
  for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (incremental_ess(log_incr, mid) >= ess_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo > 0.0 ? lo : hi;
}

void update_log_weights(ParticleEnsemble& ensemble, std::span<const double> log_incr,
                        double delta) {
  if (log_incr.size() != ensemble.log_weights.size()) {
    throw UsageError("update_log_weights: size mismatch");
  }
  if (!(delta > 0.0 && delta <= 1.0)) throw UsageError("update_log_weights: delta outside (0, 1]");
  for (std::size_t i = 0; i < log_incr.size(); ++i) {
    if (std::isnan(log_incr[i])) throw NumericError("update_log_weights: NaN increment", i);
    ensemble.log_weights[i] += delta * log_incr[i];
  }
}

std::vector<std::size_t> systematic_resample(ParticleEnsemble& ensemble, RngStream& rng) {
  const std::size_t m = ensemble.size();
  if (m == 0) throw UsageError("systematic_resample: empty ensemble");
  const auto& lw = ensemble.log_weights;
  const double max = *std::max_element(lw.begin(), lw.end());
  if (!(max > -std::numeric_limits<double>::infinity())) {
    throw DegenerateEnsembleError("systematic_resample: every weight is zero");
  }
  std::vector<double> cumulative(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    total += std::exp(lw[i] - max);
    cumulative[i] = total;
  }
  const double log_z = log_mean_exp(lw);
  const double offset = rng.uniform();
  std::vector<std::size_t> ancestors(m);
  std::size_t j = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const double position = (offset + static_cast<double>(k)) / static_cast<double>(m) * total;
    while (position > cumulative[j] && j + 1 < m) ++j;
    ancestors[k] = j;
  }
  std::vector<KineticState> selected;
  selected.reserve(m);
  for (std::size_t a : ancestors) selected.push_back(ensemble.particles[a]);
  ensemble.particles = std::move(selected);
  std::fill(ensemble.log_weights.begin(), ensemble.log_weights.end(), log_z);
  return ancestors;
}

ParticleWorkspace::ParticleWorkspace(std::uint64_t seed, std::size_t particles)
    : scratch(particles), resample_rng(seed, streams::kResample), log_incr(particles) {
  rngs.reserve(particles);
  for (std::size_t i = 0; i < particles; ++i) rngs.emplace_back(seed, streams::kParticleBase + i);
}

AnnealRecord sgais_chunk_update(ParticleEnsemble& ensemble, const ChunkContext& ctx,
                                const EstimatorConfig& config, ParticleWorkspace& work) {
  if (ctx.model == nullptr) throw UsageError("sgais_chunk_update: no model");
  if (ctx.chunk.empty()) throw UsageError("sgais_chunk_update: empty chunk");
  const std::size_t m = ensemble.size();
  if (m < 2 || work.rngs.size() < m) throw UsageError("sgais_chunk_update: invalid ensemble");

  const Stopwatch clock;
  AnnealRecord record;
  record.chunk_index = ctx.chunk_index;

  PotentialSpec spec;
  spec.model = ctx.model;
  spec.chunk = ctx.chunk;
  spec.n_prev = ctx.n_prev;
  spec.history = ctx.history;
  spec.batch_size = config.batch_size;
  spec.validate();

  parallel_for(m, config.threads, [&](std::size_t i) {
    ensemble.particles[i].momentum =
        sample_momentum(ctx.model->dim(), ctx.sghmc.eta, work.rngs[i]);
  });

  work.log_incr.resize(m);
  double lambda = 0.0;
  while (lambda < 1.0) {
    if (record.lambdas.size() >= config.max_anneal_steps) {
      throw Error("chunk " + std::to_string(ctx.chunk_index) + ": annealing did not finish within " +
                  std::to_string(config.max_anneal_steps) + " steps");
    }
    parallel_for(m, config.threads, [&](std::size_t i) {
      work.log_incr[i] = ctx.model->sum_log_lik(ensemble.particles[i].position, ctx.chunk);
    });
    for (std::size_t i = 0; i < m; ++i) {
      if (!std::isfinite(work.log_incr[i])) {
        throw DivergenceError("chunk " + std::to_string(ctx.chunk_index) +
                                  ": non-finite chunk log-likelihood",
                              ensemble.particles[i].position);
      }
    }
    const double delta = solve_annealing_step(work.log_incr, lambda, config.ess_target);
    double next = delta >= 1.0 - lambda ? 1.0 : std::min(1.0, lambda + delta);
    if (!(next > lambda)) {
      throw DegenerateEnsembleError("chunk " + std::to_string(ctx.chunk_index) +
                                    ": annealing step underflowed at lambda " + std::to_string(lambda));
    }
    update_log_weights(ensemble, work.log_incr, next - lambda);
    record.lambdas.push_back(next);
    lambda = next;

    if (config.resampling.enabled &&
        ensemble.weight_ess() < config.resampling.threshold * static_cast<double>(m)) {
      systematic_resample(ensemble, work.resample_rng);
    }

    spec.lambda = lambda;
    try {
      parallel_for(m, config.threads, [&](std::size_t i) {
        sghmc_burn_in(ensemble.particles[i], spec, ctx.sghmc, config.burn_in_steps, work.rngs[i],
                      work.scratch[i]);
      });
    } catch (const DivergenceError& e) {
      throw DivergenceError("chunk " + std::to_string(ctx.chunk_index) + ": " + e.what(),
                            e.position());
    }
  }
  record.steps = record.lambdas.size();
  record.log_z_after = ensemble.log_evidence();
  record.wall_time = clock.seconds();
  return record;
}

SgaisResult sgais_run(const BayesModel& model, data::DataStream& stream,
                      const EstimatorConfig& config, const RunHooks& hooks) {
  config.validate();
  if (stream.arity() != model.obs_arity()) {
    throw UsageError("sgais_run: dataset arity " + std::to_string(stream.arity()) +
                     " does not match model " + model.name());
  }
  if (stream.total_size() == 0) throw UsageError("sgais_run: empty stream");

  config.sghmc_for(stream.total_size()).validate();
  ParticleWorkspace work(config.seed, config.particles);
  SgaisResult result;
  result.ensemble = init_ensemble(model, config.particles, work.rngs);

  const bool use_prefix = config.history == HistoryMode::kFull && stream.memory_resident();
  const bool use_reservoir = config.history == HistoryMode::kReservoir;
  std::vector<double> retained;  // full history for file-backed streams
  data::Reservoir reservoir(config.reservoir_capacity, model.obs_arity());
  RngStream reservoir_rng(config.seed, streams::kReservoir);

  std::size_t n_prev = 0;
  std::size_t chunk_index = 0;
  while (auto chunk = stream.next_chunk()) {
    for (std::size_t n = 0; n < chunk->size(); ++n) model.validate_observation((*chunk)[n]);
    ChunkContext ctx;
    ctx.model = &model;
    ctx.chunk = *chunk;
    ctx.n_prev = n_prev;
    ctx.chunk_index = chunk_index;
    ctx.sghmc = config.sghmc_for(config.eta_scaling == EtaScaling::kTotal ? stream.total_size()
                                                                          : n_prev + chunk->size());
    if (use_prefix) {
      ctx.history = stream.consumed_prefix().rows(0, n_prev);
    } else if (use_reservoir) {
      ctx.history = reservoir.view();
    } else {
      ctx.history = ObsView(retained, model.obs_arity());
    }
    AnnealRecord record = sgais_chunk_update(result.ensemble, ctx, config, work);
    n_prev += chunk->size();
    record.n_consumed = n_prev;
    if (use_reservoir) {
      for (std::size_t n = 0; n < chunk->size(); ++n) reservoir.offer((*chunk)[n], reservoir_rng);
    } else if (!use_prefix) {
      const auto raw = chunk->raw();
      retained.insert(retained.end(), raw.begin(), raw.end());
    }
    if (hooks.on_chunk) hooks.on_chunk(record);
    result.trace.push_back(std::move(record));
    ++chunk_index;
    hooks.deadline.check("sgais_run");
  }
  if (result.trace.empty()) throw UsageError("sgais_run: stream produced no chunks");
  result.log_z = result.trace.back().log_z_after;
  return result;
}

}  // namespace sgais
