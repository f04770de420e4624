#pragma once

#include <cstddef>
#include <vector>

#include "sgais/model.hpp"
#include "sgais/numeric.hpp"
#include "sgais/observations.hpp"
#include "sgais/rng.hpp"

namespace sgais {

/// Position/momentum pair advanced by the SGHMC integrator.
struct KineticState {
  ParamVector position;
  ParamVector momentum;
};

/// Integrator constants. `alpha` is the per-step friction (1 - alpha is the momentum
/// decay), `beta_hat` offsets the injected noise for gradient noise.
struct SghmcParams {
  double eta = 1e-3;
  double alpha = 0.2;
  double beta_hat = 0.0;

  /// Throws UsageError unless eta > 0 (eta = 0 allowed when allow_zero_eta),
  /// 0 < alpha <= 1 and 0 <= beta_hat <= alpha.
  void validate(bool allow_zero_eta = false) const;
  /// Standard deviation of the injected noise, sqrt(2 (alpha - beta_hat) eta).
  double noise_scale() const;
};

/// |coordinate| above this (or non-finite) aborts a run.
inline constexpr double kDivergenceBound = 1e8;

/// The stochastic sequential potential
///   U(theta) = -lambda log p(chunk | theta)
///              - (n_prev / |B|) sum_{y in B} log p(y | theta)
///              - log p(theta)
/// with B drawn i.i.d. with replacement from `history`.
struct PotentialSpec {
  const BayesModel* model = nullptr;
  ObsView chunk;
  double lambda = 0.0;
  std::size_t n_prev = 0;
  ObsView history;  // contiguous pool that mini-batches are drawn from
  std::size_t batch_size = 1;

  void validate() const;
};

/// Reusable buffers for gradient evaluation; one per concurrent task.
struct SghmcScratch {
  std::vector<std::size_t> batch;
  ParamVector grad;
};

/// Draws a batch of `batch_size` indices uniformly with replacement from [0, pool).
void draw_batch_indices(std::size_t pool, std::size_t batch_size, RngStream& rng,
                        std::vector<std::size_t>& out);

/// Gradient of the stochastic potential for one freshly drawn mini-batch.
/// Throws DivergenceError on a non-finite gradient and UsageError on an empty history
/// with n_prev > 0.
ParamVector stochastic_potential_grad(const PotentialSpec& spec, const ParamVector& theta,
                                      RngStream& rng);
/// Allocation-free variant writing into `out`.
void stochastic_potential_grad(const PotentialSpec& spec, const ParamVector& theta,
                               RngStream& rng, SghmcScratch& scratch, ParamVector& out);

/// Gradient of the potential averaged over a given batch (no sampling). `batch`
/// indexes `spec.history`. Used for exhaustive unbiasedness checks.
ParamVector potential_grad_for_batch(const PotentialSpec& spec, const ParamVector& theta,
                                     std::span<const std::size_t> batch);

/// One SGHMC step:
///   theta' = theta + v
///   v'     = v - eta grad U(theta') - alpha v + eps sqrt(2 (alpha - beta_hat) eta)
void sghmc_step(KineticState& state, const PotentialSpec& spec, const SghmcParams& params,
                RngStream& rng, SghmcScratch& scratch);
KineticState sghmc_step(KineticState state, const PotentialSpec& spec, const SghmcParams& params,
                        RngStream& rng);

/// `steps` consecutive SGHMC steps, fresh mini-batch each step.
void sghmc_burn_in(KineticState& state, const PotentialSpec& spec, const SghmcParams& params,
                   std::size_t steps, RngStream& rng, SghmcScratch& scratch);
KineticState sghmc_burn_in(KineticState state, const PotentialSpec& spec,
                           const SghmcParams& params, std::size_t steps, RngStream& rng);

/// Momentum drawn from N(0, eta I).
ParamVector sample_momentum(std::size_t dim, double eta, RngStream& rng);

/// Throws DivergenceError if any entry is non-finite or exceeds kDivergenceBound.
void check_divergence(const KineticState& state, const char* where);

}  // namespace sgais
