#include "sgais/sghmc.hpp"

#include <cmath>
#include <string>

#include "sgais/errors.hpp"

namespace sgais {

void SghmcParams::validate(bool allow_zero_eta) const {
  if (!(eta > 0.0) && !(allow_zero_eta && eta == 0.0)) {
    throw UsageError("sghmc: learning rate must be positive");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) throw UsageError("sghmc: alpha must lie in (0, 1]");
  if (!(beta_hat >= 0.0 && beta_hat <= alpha)) {
    throw UsageError("sghmc: beta_hat must lie in [0, alpha]");
  }
}

double SghmcParams::noise_scale() const { return std::sqrt(2.0 * (alpha - beta_hat) * eta); }

void PotentialSpec::validate() const {
  if (model == nullptr) throw UsageError("potential: no model");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw UsageError("potential: lambda outside [0, 1]");
  if (batch_size == 0) throw UsageError("potential: batch size must be positive");
  if (n_prev > 0 && history.empty()) {
    throw UsageError("potential: empty history with " + std::to_string(n_prev) +
                     " previous observations");
  }
}

void draw_batch_indices(std::size_t pool, std::size_t batch_size, RngStream& rng,
                        std::vector<std::size_t>& out) {
  out.resize(batch_size);
  for (auto& i : out) i = rng.index(pool);
}

namespace {

void check_gradient(const ParamVector& grad, const ParamVector& theta) {
  if (!grad.allFinite()) throw DivergenceError("sghmc: non-finite potential gradient", theta);
}

// Chunk and prior terms of -grad U (sign flipped by the caller).
void deterministic_part(const PotentialSpec& spec, const ParamVector& theta, ParamVector& out) {
  out = spec.model->grad_log_prior(theta);
  if (spec.lambda > 0.0 && !spec.chunk.empty()) {
    spec.model->add_grad_sum_log_lik(theta, spec.chunk, spec.lambda, out);
  }
}

}  // namespace

void stochastic_potential_grad(const PotentialSpec& spec, const ParamVector& theta,
                               RngStream& rng, SghmcScratch& scratch, ParamVector& out) {
  if (spec.n_prev > 0 && spec.history.empty()) {
    throw UsageError("potential: empty history with previous observations");
  }
  deterministic_part(spec, theta, out);
  if (spec.n_prev > 0) {
    draw_batch_indices(spec.history.size(), spec.batch_size, rng, scratch.batch);
    const double scale = static_cast<double>(spec.n_prev) / static_cast<double>(spec.batch_size);
    spec.model->add_grad_sum_log_lik(theta, spec.history.select(scratch.batch), scale, out);
  }
  out = -out;
  check_gradient(out, theta);
}

ParamVector stochastic_potential_grad(const PotentialSpec& spec, const ParamVector& theta,
                                      RngStream& rng) {
  spec.validate();
  SghmcScratch scratch;
  ParamVector out;
  stochastic_potential_grad(spec, theta, rng, scratch, out);
  return out;
}

ParamVector potential_grad_for_batch(const PotentialSpec& spec, const ParamVector& theta,
                                     std::span<const std::size_t> batch) {
  spec.validate();
  ParamVector out;
  deterministic_part(spec, theta, out);
  if (spec.n_prev > 0) {
    if (batch.size() != spec.batch_size) throw UsageError("potential: batch size mismatch");
    const double scale = static_cast<double>(spec.n_prev) / static_cast<double>(batch.size());
    spec.model->add_grad_sum_log_lik(theta, spec.history.select(batch), scale, out);
  }
  return -out;
}

void check_divergence(const KineticState& state, const char* where) {
  const auto bad = [](const ParamVector& v) {
    return !v.allFinite() || (v.size() > 0 && v.cwiseAbs().maxCoeff() > kDivergenceBound);
  };
  if (bad(state.position) || bad(state.momentum)) {
    throw DivergenceError(std::string(where) + ": state diverged", state.position);
  }
}

void sghmc_step(KineticState& state, const PotentialSpec& spec, const SghmcParams& params,
                RngStream& rng, SghmcScratch& scratch) {
  state.position += state.momentum;
  state.momentum *= (1.0 - params.alpha);
  if (params.eta > 0.0) {
    stochastic_potential_grad(spec, state.position, rng, scratch, scratch.grad);
    state.momentum -= params.eta * scratch.grad;
  }
  const double noise = params.noise_scale();
  if (noise > 0.0) {
    for (Eigen::Index j = 0; j < state.momentum.size(); ++j) state.momentum[j] += noise * rng.normal();
  }
  check_divergence(state, "sghmc_step");
}

KineticState sghmc_step(KineticState state, const PotentialSpec& spec, const SghmcParams& params,
                        RngStream& rng) {
  spec.validate();
  params.validate(/*allow_zero_eta=*/true);
  SghmcScratch scratch;
  sghmc_step(state, spec, params, rng, scratch);
  return state;
}

void sghmc_burn_in(KineticState& state, const PotentialSpec& spec, const SghmcParams& params,
                   std::size_t steps, RngStream& rng, SghmcScratch& scratch) {
  for (std::size_t s = 0; s < steps; ++s) sghmc_step(state, spec, params, rng, scratch);
}

KineticState sghmc_burn_in(KineticState state, const PotentialSpec& spec,
                           const SghmcParams& params, std::size_t steps, RngStream& rng) {
  if (steps == 0) throw UsageError("sghmc_burn_in: steps must be positive");
  spec.validate();
  params.validate(/*allow_zero_eta=*/true);
  SghmcScratch scratch;
  sghmc_burn_in(state, spec, params, steps, rng, scratch);
  return state;
}

ParamVector sample_momentum(std::size_t dim, double eta, RngStream& rng) {
  ParamVector v(static_cast<Eigen::Index>(dim));
  const double sd = std::sqrt(eta);
  for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = sd * rng.normal();
  return v;
}

}  // namespace sgais
