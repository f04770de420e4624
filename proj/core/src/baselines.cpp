#include "sgais/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sgais/errors.hpp"
#include "sgais/numeric.hpp"

namespace sgais::baselines {

AisSchedule sigmoid_schedule(std::size_t steps, double shape) {
  if (steps < 2) throw UsageError("sigmoid_schedule: need at least 2 steps");
  if (!(shape > 0.0) || !std::isfinite(shape)) throw UsageError("sigmoid_schedule: shape must be positive");
  AisSchedule s;
  s.steps = steps;
  s.shape = shape;
  s.lambdas.resize(steps + 1);
  const double lo = sigmoid(-shape);
  const double span = sigmoid(shape) - lo;
  for (std::size_t t = 0; t <= steps; ++t) {
    const double x = shape * (2.0 * static_cast<double>(t) / static_cast<double>(steps) - 1.0);
    s.lambdas[t] = (sigmoid(x) - lo) / span;
  }
  s.lambdas.front() = 0.0;
  s.lambdas.back() = 1.0;
  for (std::size_t t = 1; t <= steps; ++t) {
    if (!(s.lambdas[t] > s.lambdas[t - 1])) {
      throw UsageError("sigmoid_schedule: shape too large for " + std::to_string(steps) +
                       " steps (schedule not strictly increasing)");
    }
  }
  return s;
}

namespace {

SghmcParams ais_step_params(const AisOptions& options, double lambda, std::size_t observations) {
  SghmcParams params = options.sghmc;
  if (options.step_scaling == AisStepScaling::kTempered) {
    params.eta /= std::max(lambda, 1.0 / static_cast<double>(observations));
  }
  return params;
}

}  // namespace

AisResult ais_run(const BayesModel& model, const ObsView& data, const AisSchedule& schedule,
                  const AisOptions& options) {
  if (data.empty()) throw UsageError("ais_run: empty dataset");
  if (data.arity() != model.obs_arity()) throw UsageError("ais_run: dataset arity does not match model");
  if (schedule.lambdas.size() != schedule.steps + 1 || schedule.steps < 2 ||
      schedule.lambdas.front() != 0.0 || schedule.lambdas.back() != 1.0) {
    throw UsageError("ais_run: invalid schedule");
  }
  if (options.particles < 1) throw UsageError("ais_run: need at least one particle");
  if (options.burn_in_steps == 0) throw UsageError("ais_run: burn_in_steps must be positive");
  if (options.threads == 0) throw UsageError("ais_run: threads must be positive");
  options.sghmc.validate();

  const std::size_t m = options.particles;
  std::vector<RngStream> rngs;
  rngs.reserve(m);
  for (std::size_t i = 0; i < m; ++i) rngs.emplace_back(options.seed, streams::kParticleBase + i);
  std::vector<SghmcScratch> scratch(m);
  std::vector<KineticState> particles(m);
  for (std::size_t i = 0; i < m; ++i) {
    particles[i].position = model.sample_prior(rngs[i]);
    particles[i].momentum = sample_momentum(model.dim(), options.sghmc.eta, rngs[i]);
  }

  PotentialSpec spec;
  spec.model = &model;
  spec.chunk = data;
  spec.n_prev = 0;
  spec.batch_size = 1;

  AisResult result;
  result.log_weights.assign(m, 0.0);
  std::vector<double> log_lik(m);
  double eta_prev = options.sghmc.eta;
  for (std::size_t t = 1; t <= schedule.steps; ++t) {
    const double step = schedule.lambdas[t] - schedule.lambdas[t - 1];
    parallel_for(m, options.threads, [&](std::size_t i) {
      log_lik[i] = model.sum_log_lik(particles[i].position, data);
    });
    for (std::size_t i = 0; i < m; ++i) {
      if (std::isnan(log_lik[i])) throw DivergenceError("ais_run: NaN log-likelihood", particles[i].position);
      result.log_weights[i] += step * log_lik[i];
    }
    if (t == schedule.steps) break;
    spec.lambda = schedule.lambdas[t];
    const SghmcParams params = ais_step_params(options, spec.lambda, data.size());
    // Momentum is stationary at variance eta; keep it so when eta changes between levels.
    const double momentum_scale = std::sqrt(params.eta / eta_prev);
    eta_prev = params.eta;
    parallel_for(m, options.threads, [&](std::size_t i) {
      particles[i].momentum *= momentum_scale;
      sghmc_burn_in(particles[i], spec, params, options.burn_in_steps, rngs[i], scratch[i]);
    });
    options.deadline.check("ais_run");
  }
  result.log_z = log_mean_exp(result.log_weights);
  return result;
}

ParamVector galilean_reflect(const ParamVector& v, const ParamVector& grad_loglik) {
  if (v.size() != grad_loglik.size()) throw UsageError("galilean_reflect: dimension mismatch");
  const double norm = grad_loglik.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw UsageError("galilean_reflect: reflection undefined for a zero or non-finite gradient");
  }
  const ParamVector n = grad_loglik / norm;
  return v - 2.0 * v.dot(n) * n;
}

namespace {

double full_log_lik(const BayesModel& model, const ObsView& data, const ParamVector& theta,
                    NsCounters* counters) {
  if (counters != nullptr) ++counters->likelihood_evals;
  const double l = model.sum_log_lik(theta, data);
  return std::isnan(l) ? -std::numeric_limits<double>::infinity() : l;
}

// Friction, prior force and noise applied after an accepted position move.
void finish_momentum(KineticState& s, const BayesModel& model, const SghmcParams& params,
                     RngStream& rng) {
  s.momentum *= (1.0 - params.alpha);
  s.momentum += params.eta * model.grad_log_prior(s.position);
  const double noise = params.noise_scale();
  for (Eigen::Index j = 0; j < s.momentum.size(); ++j) s.momentum[j] += noise * rng.normal();
}

}  // namespace

LivePoint ns_constrained_step(const LivePoint& point, const BayesModel& model,
                              const ObsView& data, double threshold, const SghmcParams& params,
                              RngStream& rng, NsCounters* counters) {
  if (point.log_l < threshold) {
    throw UsageError("ns_constrained_step: start point lies below the likelihood threshold");
  }
  LivePoint current = point;
  for (int attempt = 0; attempt < 2; ++attempt) {
    ParamVector proposal = current.state.position + current.state.momentum;
    const double log_l = full_log_lik(model, data, proposal, counters);
    if (log_l > threshold) {
      current.state.position = std::move(proposal);
      current.log_l = log_l;
      finish_momentum(current.state, model, params, rng);
      check_divergence(current.state, "ns_constrained_step");
      return current;
    }
    if (attempt == 1) break;
    if (counters != nullptr) ++counters->gradient_evals;
    ParamVector grad = ParamVector::Zero(proposal.size());
    model.add_grad_sum_log_lik(proposal, data, 1.0, grad);
    const double norm = grad.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) break;
    current.state.momentum = galilean_reflect(current.state.momentum, grad);
    if (counters != nullptr) ++counters->reflections;
  }
  current.state.momentum = sample_momentum(model.dim(), params.eta, rng);
  if (counters != nullptr) ++counters->momentum_resamples;
  return current;
}

KineticState ns_constrained_step(const KineticState& state, const BayesModel& model,
                                 const ObsView& data, double threshold,
                                 const SghmcParams& params, RngStream& rng) {
  params.validate();
  LivePoint point{state, model.sum_log_lik(state.position, data)};
  return ns_constrained_step(point, model, data, threshold, params, rng).state;
}

NsResult ns_run(const BayesModel& model, const ObsView& data, const NsOptions& options) {
  if (data.empty()) throw UsageError("ns_run: empty dataset");
  if (data.arity() != model.obs_arity()) throw UsageError("ns_run: dataset arity does not match model");
  if (options.live_points < 2) throw UsageError("ns_run: need at least 2 live points");
  if (options.steps_per_replace == 0) throw UsageError("ns_run: steps_per_replace must be positive");
  if (!(options.stop_frac > 0.0)) throw UsageError("ns_run: stop_frac must be positive");
  options.sghmc.validate();

  const std::size_t k_live = options.live_points;
  const double inv_k = 1.0 / static_cast<double>(k_live);
  RngStream rng(options.seed, streams::kNestedSampling);
  NsResult result;
  std::vector<LivePoint> live(k_live);
  for (auto& p : live) {
    p.state.position = model.sample_prior(rng);
    p.state.momentum = sample_momentum(model.dim(), options.sghmc.eta, rng);
    p.log_l = full_log_lik(model, data, p.state.position, &result.counters);
  }

  const double log_stop = std::log(options.stop_frac);
  double log_z = -std::numeric_limits<double>::infinity();
  std::size_t k = 0;
  const auto log_x = [&](std::size_t i) { return -static_cast<double>(i) / static_cast<double>(k_live); };
  const auto by_log_l = [](const LivePoint& a, const LivePoint& b) { return a.log_l < b.log_l; };

  for (;;) {
    const auto [lo_it, hi_it] = std::minmax_element(live.begin(), live.end(), by_log_l);
    const double max_l = hi_it->log_l;
    if (lo_it->log_l == max_l) {
      result.degenerate = true;
      break;
    }
    if (max_l + log_x(k) < log_stop + log_z) break;
    if (k >= options.max_iterations) {
      throw Error("ns_run: no convergence within " + std::to_string(options.max_iterations) +
                  " iterations");
    }
    options.deadline.check("ns_run");

    const std::size_t worst = static_cast<std::size_t>(lo_it - live.begin());
    const double threshold = live[worst].log_l;
    ++k;
    // X_{k-1} - X_k = X_k (e^{1/K} - 1)
    const double log_dx = log_x(k) + std::log(std::expm1(inv_k));
    log_z = log_add_exp(log_z, threshold + log_dx);
    result.trace.push_back({k, threshold, log_x(k), log_z});

    std::size_t donor = rng.index(k_live - 1);
    if (donor >= worst) ++donor;
    LivePoint walker = live[donor];
    walker.state.momentum = sample_momentum(model.dim(), options.sghmc.eta, rng);
    for (std::size_t s = 0; s < options.steps_per_replace; ++s) {
      walker = ns_constrained_step(walker, model, data, threshold, options.sghmc, rng,
                                   &result.counters);
    }
    live[worst] = std::move(walker);
  }

  std::vector<double> live_l(k_live);
  std::transform(live.begin(), live.end(), live_l.begin(), [](const LivePoint& p) { return p.log_l; });
  log_z = log_add_exp(log_z, log_mean_exp(live_l) + log_x(k));
  result.log_z = log_z;
  return result;
}

}  // namespace sgais::baselines
