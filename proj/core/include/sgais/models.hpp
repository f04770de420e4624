#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "sgais/model.hpp"
#include "sgais/observations.hpp"

namespace sgais::models {

/// Bayesian linear regression y = w.x + b + eps, eps ~ N(0, noise_var), known noise.
///
/// Observation layout: (x_1..x_D, y). Parameters (w_1..w_D, b), prior N(0, I).
class LinRegModel final : public BayesModel {
 public:
  explicit LinRegModel(double noise_var = 1.0, std::size_t x_dim = 5);

  std::string name() const override;
  std::size_t dim() const override { return x_dim_ + 1; }
  std::size_t obs_arity() const override { return x_dim_ + 1; }
  double noise_var() const noexcept { return noise_var_; }
  std::size_t x_dim() const noexcept { return x_dim_; }

  double log_prior(const ParamVector& theta) const override;
  ParamVector grad_log_prior(const ParamVector& theta) const override;
  ParamVector sample_prior(RngStream& rng) const override;
  double log_lik(const ParamVector& theta, Observation obs) const override;
  void add_grad_log_lik(const ParamVector& theta, Observation obs, double scale,
                        Eigen::Ref<Eigen::VectorXd> grad) const override;
  void sample_observation(const ParamVector& theta, RngStream& rng,
                          std::span<double> out) const override;
  double sum_log_lik(const ParamVector& theta, const ObsView& data) const override;
  void add_grad_sum_log_lik(const ParamVector& theta, const ObsView& data, double scale,
                            Eigen::Ref<Eigen::VectorXd> grad) const override;

 private:
  double residual(const ParamVector& theta, Observation obs) const;

  double noise_var_;
  std::size_t x_dim_;
};

/// Multiclass softmax regression p(y=k | x) = softmax(W x + b)_k.
///
/// Observation layout: (x_1..x_D, label) with label in {0..K-1} stored as a real.
/// Parameters: W row-major (K x D) followed by b (K); prior N(0, I).
class LogRegModel final : public BayesModel {
 public:
  explicit LogRegModel(std::size_t x_dim = 10, std::size_t classes = 4);

  std::string name() const override;
  std::size_t dim() const override { return classes_ * (x_dim_ + 1); }
  std::size_t obs_arity() const override { return x_dim_ + 1; }
  std::size_t classes() const noexcept { return classes_; }
  std::size_t x_dim() const noexcept { return x_dim_; }

  /// Class probabilities for covariates `x`.
  Eigen::VectorXd class_probabilities(const ParamVector& theta, std::span<const double> x) const;

  double log_prior(const ParamVector& theta) const override;
  ParamVector grad_log_prior(const ParamVector& theta) const override;
  ParamVector sample_prior(RngStream& rng) const override;
  double log_lik(const ParamVector& theta, Observation obs) const override;
  void add_grad_log_lik(const ParamVector& theta, Observation obs, double scale,
                        Eigen::Ref<Eigen::VectorXd> grad) const override;
  void sample_observation(const ParamVector& theta, RngStream& rng,
                          std::span<double> out) const override;
  void validate_observation(Observation obs) const override;

 private:
  std::size_t x_dim_;
  std::size_t classes_;
};

/// Diagonal-covariance Gaussian mixture with the latent assignments marginalized.
///
/// Unconstrained parameters, in order:
///   logits l_1..l_K            weights beta = softmax(l)
///   means mu_{k,j}             row-major K x D
///   log-variances s_{k,j}      sigma^2_{k,j} = exp(s_{k,j}), row-major K x D
///
/// Prior: beta ~ Dirichlet(1), mu_{k,j} | sigma^2 ~ N(0, 4 sigma^2_{k,j}),
/// sigma^2_{k,j} ~ InvGamma(1, 1). The Dirichlet is carried to the logits through the
/// softmax restricted to the sum-zero subspace; the remaining gauge direction (the
/// mean logit) gets a N(0, 10^2) anchor. Written out, the logit part of the density is
///   log N(mean(l); 0, 100) + log (K-1)! + sum_k log beta_k
/// which integrates to one over R^K.
class GmmModel final : public BayesModel {
 public:
  static constexpr std::size_t kMaxComponents = 32;
  static constexpr double kLogitAnchorVar = 100.0;

  explicit GmmModel(std::size_t components = 5, std::size_t obs_dim = 2);

  std::string name() const override;
  std::size_t dim() const override { return components_ * (1 + 2 * obs_dim_); }
  std::size_t obs_arity() const override { return obs_dim_; }
  std::size_t components() const noexcept { return components_; }
  std::size_t obs_dim() const noexcept { return obs_dim_; }

  std::size_t logit_index(std::size_t k) const noexcept { return k; }
  std::size_t mean_index(std::size_t k, std::size_t j) const noexcept {
    return components_ + k * obs_dim_ + j;
  }
  std::size_t log_var_index(std::size_t k, std::size_t j) const noexcept {
    return components_ * (1 + obs_dim_) + k * obs_dim_ + j;
  }

  /// Packs constrained values into an unconstrained parameter vector (mean logit 0).
  ParamVector pack(std::span<const double> weights, std::span<const double> means,
                   std::span<const double> variances) const;

  double log_prior(const ParamVector& theta) const override;
  ParamVector grad_log_prior(const ParamVector& theta) const override;
  ParamVector sample_prior(RngStream& rng) const override;
  double log_lik(const ParamVector& theta, Observation obs) const override;
  void add_grad_log_lik(const ParamVector& theta, Observation obs, double scale,
                        Eigen::Ref<Eigen::VectorXd> grad) const override;
  void sample_observation(const ParamVector& theta, RngStream& rng,
                          std::span<double> out) const override;
  double sum_log_lik(const ParamVector& theta, const ObsView& data) const override;
  void add_grad_sum_log_lik(const ParamVector& theta, const ObsView& data, double scale,
                            Eigen::Ref<Eigen::VectorXd> grad) const override;

 private:
  struct Prepared;
  Prepared prepare(const ParamVector& theta) const;

  std::size_t components_;
  std::size_t obs_dim_;
};

/// One-parameter conjugate model: theta ~ N(0, prior_var), y ~ N(theta, noise_var).
/// Its evidence has a closed form (gaussian_mean_log_ml_exact).
class GaussianMeanModel final : public BayesModel {
 public:
  explicit GaussianMeanModel(double prior_var = 1.0, double noise_var = 1.0);

  std::string name() const override;
  std::size_t dim() const override { return 1; }
  std::size_t obs_arity() const override { return 1; }
  double prior_var() const noexcept { return prior_var_; }
  double noise_var() const noexcept { return noise_var_; }

  double log_prior(const ParamVector& theta) const override;
  ParamVector grad_log_prior(const ParamVector& theta) const override;
  ParamVector sample_prior(RngStream& rng) const override;
  double log_lik(const ParamVector& theta, Observation obs) const override;
  void add_grad_log_lik(const ParamVector& theta, Observation obs, double scale,
                        Eigen::Ref<Eigen::VectorXd> grad) const override;
  void sample_observation(const ParamVector& theta, RngStream& rng,
                          std::span<double> out) const override;

 private:
  double prior_var_;
  double noise_var_;
};

/// Likelihood that ignores both parameters and data: log p(y | theta) = log_c.
/// Prior N(0, I_dim). The evidence of N observations is exactly N * log_c.
class ConstantLikelihoodModel final : public BayesModel {
 public:
  explicit ConstantLikelihoodModel(double log_c = 0.0, std::size_t dim = 1);

  std::string name() const override;
  std::size_t dim() const override { return dim_; }
  std::size_t obs_arity() const override { return 1; }
  double log_c() const noexcept { return log_c_; }

  double log_prior(const ParamVector& theta) const override;
  ParamVector grad_log_prior(const ParamVector& theta) const override;
  ParamVector sample_prior(RngStream& rng) const override;
  double log_lik(const ParamVector& theta, Observation obs) const override;
  void add_grad_log_lik(const ParamVector& theta, Observation obs, double scale,
                        Eigen::Ref<Eigen::VectorXd> grad) const override;
  void sample_observation(const ParamVector& theta, RngStream& rng,
                          std::span<double> out) const override;

 private:
  double log_c_;
  std::size_t dim_;
};

/// Parameter-free density q(y) = N(y; 0, 1). A single dummy parameter with a
/// N(0, 1) prior keeps the sampler machinery uniform; it never enters the likelihood.
class FixedDensityModel final : public BayesModel {
 public:
  std::string name() const override { return "fixed-density"; }
  std::size_t dim() const override { return 1; }
  std::size_t obs_arity() const override { return 1; }

  double log_prior(const ParamVector& theta) const override;
  ParamVector grad_log_prior(const ParamVector& theta) const override;
  ParamVector sample_prior(RngStream& rng) const override;
  double log_lik(const ParamVector& theta, Observation obs) const override;
  void add_grad_log_lik(const ParamVector& theta, Observation obs, double scale,
                        Eigen::Ref<Eigen::VectorXd> grad) const override;
  void sample_observation(const ParamVector& theta, RngStream& rng,
                          std::span<double> out) const override;
};

/// Builds a model from its id:
///   linreg | logreg | gmm | gmm:K:D | gaussian-mean | constant:<log_c> | fixed-density
/// Throws UsageError for unknown ids.
std::unique_ptr<BayesModel> make_model(std::string_view id);

/// Exact log evidence of LinRegModel on (X, y), via the (D+1)x(D+1) Woodbury form.
double linreg_log_ml_exact(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double noise_var);
/// Same, reading observations packed as (x, y) rows.
double linreg_log_ml_exact(const ObsView& data, double noise_var);

/// Exact log evidence of GaussianMeanModel.
double gaussian_mean_log_ml_exact(const ObsView& data, double prior_var, double noise_var);

/// Draws N observations i.i.d. from p(y | truth). Regression covariates are N(0, I).
Dataset generate_observations(const BayesModel& model, const ParamVector& truth, std::size_t n,
                              RngStream& rng);

}  // namespace sgais::models
