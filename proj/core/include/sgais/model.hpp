#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>

#include "sgais/numeric.hpp"
#include "sgais/observations.hpp"
#include "sgais/rng.hpp"

namespace sgais {

/// A Bayesian model with conditionally independent observations.
///
/// Implementations supply the per-observation log-likelihood and its gradient, the
/// log-prior and its gradient, and prior/observation samplers. Everything is
/// evaluated in the model's unconstrained parameter space; log_prior includes any
/// change-of-variables Jacobian so that exp(log_prior) integrates to one there.
///
/// Models are immutable after construction, so all members are safe to call
/// concurrently.
class BayesModel {
 public:
  virtual ~BayesModel() = default;

  /// Canonical id (round-trips through make_model()).
  virtual std::string name() const = 0;
  /// Parameter dimension d.
  virtual std::size_t dim() const = 0;
  /// Reals per observation.
  virtual std::size_t obs_arity() const = 0;

  virtual double log_prior(const ParamVector& theta) const = 0;
  virtual ParamVector grad_log_prior(const ParamVector& theta) const = 0;
  virtual ParamVector sample_prior(RngStream& rng) const = 0;

  virtual double log_lik(const ParamVector& theta, Observation obs) const = 0;
  /// grad += scale * d/dtheta log p(obs | theta).
  virtual void add_grad_log_lik(const ParamVector& theta, Observation obs, double scale,
                                Eigen::Ref<Eigen::VectorXd> grad) const = 0;
  /// Draws one observation from p(y | theta) into `out` (length obs_arity()).
  virtual void sample_observation(const ParamVector& theta, RngStream& rng,
                                  std::span<double> out) const = 0;

  /// Throws UsageError if `obs` is malformed for this model (wrong arity, bad label).
  virtual void validate_observation(Observation obs) const;

  /// sum_n log p(y_n | theta). Models override this when per-call setup can be hoisted.
  virtual double sum_log_lik(const ParamVector& theta, const ObsView& data) const;
  /// grad += scale * sum_n d/dtheta log p(y_n | theta).
  virtual void add_grad_sum_log_lik(const ParamVector& theta, const ObsView& data, double scale,
                                    Eigen::Ref<Eigen::VectorXd> grad) const;

  ParamVector grad_log_lik(const ParamVector& theta, Observation obs) const;
};

}  // namespace sgais
