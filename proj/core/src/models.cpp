#include "sgais/models.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "sgais/errors.hpp"

namespace sgais::models {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)

double std_normal_log_prior(const ParamVector& theta) {
  return -0.5 * (static_cast<double>(theta.size()) * kLog2Pi + theta.squaredNorm());
}

ParamVector std_normal_sample(std::size_t dim, RngStream& rng) {
  ParamVector theta(static_cast<Eigen::Index>(dim));
  for (Eigen::Index j = 0; j < theta.size(); ++j) theta[j] = rng.normal();
  return theta;
}

void check_dim(const BayesModel& model, const ParamVector& theta) {
  if (static_cast<std::size_t>(theta.size()) != model.dim()) {
    throw UsageError(model.name() + ": parameter length " + std::to_string(theta.size()) +
                     ", expected " + std::to_string(model.dim()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Linear regression

LinRegModel::LinRegModel(double noise_var, std::size_t x_dim)
    : noise_var_(noise_var), x_dim_(x_dim) {
  if (!(noise_var > 0.0)) throw UsageError("linreg: noise variance must be positive");
  if (x_dim == 0) throw UsageError("linreg: covariate dimension must be positive");
}

std::string LinRegModel::name() const { return "linreg"; }

double LinRegModel::log_prior(const ParamVector& theta) const { return std_normal_log_prior(theta); }

ParamVector LinRegModel::grad_log_prior(const ParamVector& theta) const { return -theta; }

ParamVector LinRegModel::sample_prior(RngStream& rng) const { return std_normal_sample(dim(), rng); }

double LinRegModel::residual(const ParamVector& theta, Observation obs) const {
  const double* w = theta.data();
  double fit = w[x_dim_];
  for (std::size_t j = 0; j < x_dim_; ++j) fit += w[j] * obs[j];
  return obs[x_dim_] - fit;
}

double LinRegModel::log_lik(const ParamVector& theta, Observation obs) const {
  const double r = residual(theta, obs);
  return -0.5 * (kLog2Pi + std::log(noise_var_) + r * r / noise_var_);
}

void LinRegModel::add_grad_log_lik(const ParamVector& theta, Observation obs, double scale,
                                   Eigen::Ref<Eigen::VectorXd> grad) const {
  const double g = scale * residual(theta, obs) / noise_var_;
  for (std::size_t j = 0; j < x_dim_; ++j) grad[static_cast<Eigen::Index>(j)] += g * obs[j];
  grad[static_cast<Eigen::Index>(x_dim_)] += g;
}

double LinRegModel::sum_log_lik(const ParamVector& theta, const ObsView& data) const {
  double sq = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    const double r = residual(theta, data[n]);
    sq += r * r;
  }
  const auto count = static_cast<double>(data.size());
  return -0.5 * (count * (kLog2Pi + std::log(noise_var_)) + sq / noise_var_);
}

void LinRegModel::add_grad_sum_log_lik(const ParamVector& theta, const ObsView& data, double scale,
                                       Eigen::Ref<Eigen::VectorXd> grad) const {
  // Accumulate sum_n r_n (x_n, 1) locally, then scale once.
  std::array<double, 64> local{};
  std::vector<double> heap;
  double* acc = local.data();
  if (x_dim_ + 1 > local.size()) {
    heap.assign(x_dim_ + 1, 0.0);
    acc = heap.data();
  }
  for (std::size_t n = 0; n < data.size(); ++n) {
    const Observation obs = data[n];
    const double r = residual(theta, obs);
    for (std::size_t j = 0; j < x_dim_; ++j) acc[j] += r * obs[j];
    acc[x_dim_] += r;
  }
  const double g = scale / noise_var_;
  for (std::size_t j = 0; j <= x_dim_; ++j) grad[static_cast<Eigen::Index>(j)] += g * acc[j];
}

void LinRegModel::sample_observation(const ParamVector& theta, RngStream& rng,
                                     std::span<double> out) const {
  double fit = theta[static_cast<Eigen::Index>(x_dim_)];
  for (std::size_t j = 0; j < x_dim_; ++j) {
    out[j] = rng.normal();
    fit += theta[static_cast<Eigen::Index>(j)] * out[j];
  }
  out[x_dim_] = fit + std::sqrt(noise_var_) * rng.normal();
}

// ---------------------------------------------------------------------------
// Logistic (softmax) regression

LogRegModel::LogRegModel(std::size_t x_dim, std::size_t classes) : x_dim_(x_dim), classes_(classes) {
  if (x_dim == 0 || classes < 2) throw UsageError("logreg: need x_dim >= 1 and classes >= 2");
}

std::string LogRegModel::name() const { return "logreg"; }

Eigen::VectorXd LogRegModel::class_probabilities(const ParamVector& theta,
                                                 std::span<const double> x) const {
  Eigen::VectorXd z(static_cast<Eigen::Index>(classes_));
  const std::size_t bias = classes_ * x_dim_;
  for (std::size_t k = 0; k < classes_; ++k) {
    double s = theta[static_cast<Eigen::Index>(bias + k)];
    for (std::size_t j = 0; j < x_dim_; ++j) s += theta[static_cast<Eigen::Index>(k * x_dim_ + j)] * x[j];
    z[static_cast<Eigen::Index>(k)] = s;
  }
  const double lse = log_sum_exp(std::span<const double>(z.data(), classes_));
  return (z.array() - lse).exp();
}

double LogRegModel::log_prior(const ParamVector& theta) const { return std_normal_log_prior(theta); }

ParamVector LogRegModel::grad_log_prior(const ParamVector& theta) const { return -theta; }

ParamVector LogRegModel::sample_prior(RngStream& rng) const { return std_normal_sample(dim(), rng); }

void LogRegModel::validate_observation(Observation obs) const {
  BayesModel::validate_observation(obs);
  const double label = obs[x_dim_];
  if (!(label >= 0.0) || label >= static_cast<double>(classes_) || label != std::floor(label)) {
    throw UsageError("logreg: label " + std::to_string(label) + " outside {0.." +
                     std::to_string(classes_ - 1) + "}");
  }
}

double LogRegModel::log_lik(const ParamVector& theta, Observation obs) const {
  std::array<double, 64> z{};
  const std::size_t bias = classes_ * x_dim_;
  double max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < classes_; ++k) {
    double s = theta[static_cast<Eigen::Index>(bias + k)];
    for (std::size_t j = 0; j < x_dim_; ++j) s += theta[static_cast<Eigen::Index>(k * x_dim_ + j)] * obs[j];
    z[k] = s;
    max = std::max(max, s);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < classes_; ++k) sum += std::exp(z[k] - max);
  const auto label = static_cast<std::size_t>(obs[x_dim_]);
  return z[label] - max - std::log(sum);
}

void LogRegModel::add_grad_log_lik(const ParamVector& theta, Observation obs, double scale,
                                   Eigen::Ref<Eigen::VectorXd> grad) const {
  std::array<double, 64> p{};
  const std::size_t bias = classes_ * x_dim_;
  double max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < classes_; ++k) {
    double s = theta[static_cast<Eigen::Index>(bias + k)];
    for (std::size_t j = 0; j < x_dim_; ++j) s += theta[static_cast<Eigen::Index>(k * x_dim_ + j)] * obs[j];
    p[k] = s;
    max = std::max(max, s);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < classes_; ++k) {
    p[k] = std::exp(p[k] - max);
    sum += p[k];
  }
  const auto label = static_cast<std::size_t>(obs[x_dim_]);
  for (std::size_t k = 0; k < classes_; ++k) {
    const double g = scale * ((k == label ? 1.0 : 0.0) - p[k] / sum);
    for (std::size_t j = 0; j < x_dim_; ++j) grad[static_cast<Eigen::Index>(k * x_dim_ + j)] += g * obs[j];
    grad[static_cast<Eigen::Index>(bias + k)] += g;
  }
}

void LogRegModel::sample_observation(const ParamVector& theta, RngStream& rng,
                                     std::span<double> out) const {
  for (std::size_t j = 0; j < x_dim_; ++j) out[j] = rng.normal();
  const Eigen::VectorXd p = class_probabilities(theta, out.first(x_dim_));
  double u = rng.uniform();
  std::size_t label = classes_ - 1;
  for (std::size_t k = 0; k < classes_; ++k) {
    u -= p[static_cast<Eigen::Index>(k)];
    if (u < 0.0) {
      label = k;
      break;
    }
  }
  out[x_dim_] = static_cast<double>(label);
}

// ---------------------------------------------------------------------------
// Gaussian mixture

struct GmmModel::Prepared {
  std::array<double, kMaxComponents> log_weight{};
  std::array<double, kMaxComponents> weight{};
  std::array<double, kMaxComponents> log_norm{};  // log beta_k - 1/2 sum_j (log 2pi + s_kj)
  std::vector<double> mean;                       // K x D
  std::vector<double> inv_var;                    // K x D
};

GmmModel::GmmModel(std::size_t components, std::size_t obs_dim)
    : components_(components), obs_dim_(obs_dim) {
  if (components == 0 || components > kMaxComponents) {
    throw UsageError("gmm: component count must be in [1, " + std::to_string(kMaxComponents) + "]");
  }
  if (obs_dim == 0) throw UsageError("gmm: observation dimension must be positive");
}

std::string GmmModel::name() const {
  if (components_ == 5 && obs_dim_ == 2) return "gmm";
  return "gmm:" + std::to_string(components_) + ":" + std::to_string(obs_dim_);
}

GmmModel::Prepared GmmModel::prepare(const ParamVector& theta) const {
  Prepared p;
  const std::size_t kd = components_ * obs_dim_;
  p.mean.resize(kd);
  p.inv_var.resize(kd);
  const double lse = log_sum_exp(std::span<const double>(theta.data(), components_));
  for (std::size_t k = 0; k < components_; ++k) {
    p.log_weight[k] = theta[static_cast<Eigen::Index>(k)] - lse;
    p.weight[k] = std::exp(p.log_weight[k]);
    double norm = p.log_weight[k];
    for (std::size_t j = 0; j < obs_dim_; ++j) {
      const double s = theta[static_cast<Eigen::Index>(log_var_index(k, j))];
      p.mean[k * obs_dim_ + j] = theta[static_cast<Eigen::Index>(mean_index(k, j))];
      p.inv_var[k * obs_dim_ + j] = std::exp(-s);
      norm -= 0.5 * (kLog2Pi + s);
    }
    p.log_norm[k] = norm;
  }
  return p;
}

ParamVector GmmModel::pack(std::span<const double> weights, std::span<const double> means,
                           std::span<const double> variances) const {
  if (weights.size() != components_ || means.size() != components_ * obs_dim_ ||
      variances.size() != components_ * obs_dim_) {
    throw UsageError("gmm: pack size mismatch");
  }
  ParamVector theta(static_cast<Eigen::Index>(dim()));
  double mean_log = 0.0;
  for (double w : weights) mean_log += std::log(w);
  mean_log /= static_cast<double>(components_);
  for (std::size_t k = 0; k < components_; ++k) {
    theta[static_cast<Eigen::Index>(k)] = std::log(weights[k]) - mean_log;
    for (std::size_t j = 0; j < obs_dim_; ++j) {
      theta[static_cast<Eigen::Index>(mean_index(k, j))] = means[k * obs_dim_ + j];
      theta[static_cast<Eigen::Index>(log_var_index(k, j))] = std::log(variances[k * obs_dim_ + j]);
    }
  }
  return theta;
}

double GmmModel::log_prior(const ParamVector& theta) const {
  const auto K = static_cast<double>(components_);
  const std::span<const double> logits(theta.data(), components_);
  const double lse = log_sum_exp(logits);
  double mean_logit = 0.0;
  double sum_log_beta = 0.0;
  for (double l : logits) {
    mean_logit += l;
    sum_log_beta += l - lse;
  }
  mean_logit /= K;
  double lp = log_normal_pdf(mean_logit, 0.0, kLogitAnchorVar) + std::lgamma(K) + sum_log_beta;
  for (std::size_t k = 0; k < components_; ++k) {
    for (std::size_t j = 0; j < obs_dim_; ++j) {
      const double mu = theta[static_cast<Eigen::Index>(mean_index(k, j))];
      const double s = theta[static_cast<Eigen::Index>(log_var_index(k, j))];
      // mu | sigma^2 ~ N(0, 4 sigma^2); log InvGamma(e^s; 1, 1) + s = -s - e^{-s}
      lp += -0.5 * (kLog2Pi + std::log(4.0) + s + mu * mu * std::exp(-s) / 4.0);
      lp += -s - std::exp(-s);
    }
  }
  return lp;
}

ParamVector GmmModel::grad_log_prior(const ParamVector& theta) const {
  const auto K = static_cast<double>(components_);
  ParamVector g(theta.size());
  const std::span<const double> logits(theta.data(), components_);
  const double lse = log_sum_exp(logits);
  double mean_logit = 0.0;
  for (double l : logits) mean_logit += l;
  mean_logit /= K;
  for (std::size_t k = 0; k < components_; ++k) {
    const double beta = std::exp(logits[k] - lse);
    g[static_cast<Eigen::Index>(k)] = -mean_logit / (kLogitAnchorVar * K) + 1.0 - K * beta;
    for (std::size_t j = 0; j < obs_dim_; ++j) {
      const auto mi = static_cast<Eigen::Index>(mean_index(k, j));
      const auto si = static_cast<Eigen::Index>(log_var_index(k, j));
      const double inv_var = std::exp(-theta[si]);
      const double mu = theta[mi];
      g[mi] = -mu * inv_var / 4.0;
      g[si] = -0.5 + mu * mu * inv_var / 8.0 - 1.0 + inv_var;
    }
  }
  return g;
}

ParamVector GmmModel::sample_prior(RngStream& rng) const {
  ParamVector theta(static_cast<Eigen::Index>(dim()));
  std::array<double, kMaxComponents> log_e{};
  double mean_log = 0.0;
  for (std::size_t k = 0; k < components_; ++k) {
    log_e[k] = std::log(rng.exponential());
    mean_log += log_e[k];
  }
  mean_log /= static_cast<double>(components_);
  const double anchor = std::sqrt(kLogitAnchorVar) * rng.normal();
  for (std::size_t k = 0; k < components_; ++k) {
    theta[static_cast<Eigen::Index>(k)] = log_e[k] - mean_log + anchor;
  }
  for (std::size_t k = 0; k < components_; ++k) {
    for (std::size_t j = 0; j < obs_dim_; ++j) {
      const double var = 1.0 / rng.exponential();
      theta[static_cast<Eigen::Index>(log_var_index(k, j))] = std::log(var);
      theta[static_cast<Eigen::Index>(mean_index(k, j))] = std::sqrt(4.0 * var) * rng.normal();
    }
  }
  return theta;
}

double GmmModel::log_lik(const ParamVector& theta, Observation obs) const {
  const Prepared p = prepare(theta);
  std::array<double, kMaxComponents> t{};
  double max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < components_; ++k) {
    double q = 0.0;
    for (std::size_t j = 0; j < obs_dim_; ++j) {
      const double d = obs[j] - p.mean[k * obs_dim_ + j];
      q += d * d * p.inv_var[k * obs_dim_ + j];
    }
    t[k] = p.log_norm[k] - 0.5 * q;
    max = std::max(max, t[k]);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < components_; ++k) sum += std::exp(t[k] - max);
  return max + std::log(sum);
}

double GmmModel::sum_log_lik(const ParamVector& theta, const ObsView& data) const {
  const Prepared p = prepare(theta);
  std::array<double, kMaxComponents> t{};
  double total = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    const Observation y = data[n];
    double max = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < components_; ++k) {
      double q = 0.0;
      for (std::size_t j = 0; j < obs_dim_; ++j) {
        const double d = y[j] - p.mean[k * obs_dim_ + j];
        q += d * d * p.inv_var[k * obs_dim_ + j];
      }
      t[k] = p.log_norm[k] - 0.5 * q;
      max = std::max(max, t[k]);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < components_; ++k) sum += std::exp(t[k] - max);
    total += max + std::log(sum);
  }
  return total;
}

void GmmModel::add_grad_log_lik(const ParamVector& theta, Observation obs, double scale,
                                Eigen::Ref<Eigen::VectorXd> grad) const {
  std::array<std::size_t, 1> idx{0};
  add_grad_sum_log_lik(theta, ObsView(obs, obs_dim_, idx), scale, grad);
}

void GmmModel::add_grad_sum_log_lik(const ParamVector& theta, const ObsView& data, double scale,
                                    Eigen::Ref<Eigen::VectorXd> grad) const {
  const Prepared p = prepare(theta);
  const std::size_t kd = components_ * obs_dim_;
  // Accumulate sufficient statistics first, then map to the parameter gradient once.
  std::array<double, kMaxComponents> resp_sum{};
  std::vector<double> first(kd, 0.0);   // sum_n r_k (y_j - mu_kj)
  std::vector<double> second(kd, 0.0);  // sum_n r_k (y_j - mu_kj)^2
  std::array<double, kMaxComponents> t{};
  for (std::size_t n = 0; n < data.size(); ++n) {
    const Observation y = data[n];
    double max = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < components_; ++k) {
      double q = 0.0;
      for (std::size_t j = 0; j < obs_dim_; ++j) {
        const double d = y[j] - p.mean[k * obs_dim_ + j];
        q += d * d * p.inv_var[k * obs_dim_ + j];
      }
      t[k] = p.log_norm[k] - 0.5 * q;
      max = std::max(max, t[k]);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < components_; ++k) {
      t[k] = std::exp(t[k] - max);
      sum += t[k];
    }
    const double inv_sum = 1.0 / sum;
    for (std::size_t k = 0; k < components_; ++k) {
      const double r = t[k] * inv_sum;
      resp_sum[k] += r;
      for (std::size_t j = 0; j < obs_dim_; ++j) {
        const double d = y[j] - p.mean[k * obs_dim_ + j];
        first[k * obs_dim_ + j] += r * d;
        second[k * obs_dim_ + j] += r * d * d;
      }
    }
  }
  const auto count = static_cast<double>(data.size());
  for (std::size_t k = 0; k < components_; ++k) {
    grad[static_cast<Eigen::Index>(k)] += scale * (resp_sum[k] - count * p.weight[k]);
    for (std::size_t j = 0; j < obs_dim_; ++j) {
      const std::size_t c = k * obs_dim_ + j;
      grad[static_cast<Eigen::Index>(mean_index(k, j))] += scale * first[c] * p.inv_var[c];
      grad[static_cast<Eigen::Index>(log_var_index(k, j))] +=
          scale * 0.5 * (second[c] * p.inv_var[c] - resp_sum[k]);
    }
  }
}

void GmmModel::sample_observation(const ParamVector& theta, RngStream& rng,
                                  std::span<double> out) const {
  const Prepared p = prepare(theta);
  double u = rng.uniform();
  std::size_t comp = components_ - 1;
  for (std::size_t k = 0; k < components_; ++k) {
    u -= p.weight[k];
    if (u < 0.0) {
      comp = k;
      break;
    }
  }
  for (std::size_t j = 0; j < obs_dim_; ++j) {
    const std::size_t c = comp * obs_dim_ + j;
    out[j] = p.mean[c] + std::sqrt(1.0 / p.inv_var[c]) * rng.normal();
  }
}

// ---------------------------------------------------------------------------
// Conjugate Gaussian mean

GaussianMeanModel::GaussianMeanModel(double prior_var, double noise_var)
    : prior_var_(prior_var), noise_var_(noise_var) {
  if (!(prior_var > 0.0) || !(noise_var > 0.0)) {
    throw UsageError("gaussian-mean: variances must be positive");
  }
}

std::string GaussianMeanModel::name() const { return "gaussian-mean"; }

double GaussianMeanModel::log_prior(const ParamVector& theta) const {
  return log_normal_pdf(theta[0], 0.0, prior_var_);
}

ParamVector GaussianMeanModel::grad_log_prior(const ParamVector& theta) const {
  return -theta / prior_var_;
}

ParamVector GaussianMeanModel::sample_prior(RngStream& rng) const {
  ParamVector theta(1);
  theta[0] = std::sqrt(prior_var_) * rng.normal();
  return theta;
}

double GaussianMeanModel::log_lik(const ParamVector& theta, Observation obs) const {
  return log_normal_pdf(obs[0], theta[0], noise_var_);
}

void GaussianMeanModel::add_grad_log_lik(const ParamVector& theta, Observation obs, double scale,
                                         Eigen::Ref<Eigen::VectorXd> grad) const {
  grad[0] += scale * (obs[0] - theta[0]) / noise_var_;
}

void GaussianMeanModel::sample_observation(const ParamVector& theta, RngStream& rng,
                                           std::span<double> out) const {
  out[0] = theta[0] + std::sqrt(noise_var_) * rng.normal();
}

// ---------------------------------------------------------------------------
// Parameter-free likelihoods

ConstantLikelihoodModel::ConstantLikelihoodModel(double log_c, std::size_t dim)
    : log_c_(log_c), dim_(dim) {
  if (dim == 0) throw UsageError("constant: dimension must be positive");
  if (!std::isfinite(log_c)) throw UsageError("constant: log c must be finite");
}

std::string ConstantLikelihoodModel::name() const {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, log_c_);
  (void)ec;
  return "constant:" + std::string(buf, end);
}

double ConstantLikelihoodModel::log_prior(const ParamVector& theta) const {
  return std_normal_log_prior(theta);
}

ParamVector ConstantLikelihoodModel::grad_log_prior(const ParamVector& theta) const { return -theta; }

ParamVector ConstantLikelihoodModel::sample_prior(RngStream& rng) const {
  return std_normal_sample(dim_, rng);
}

double ConstantLikelihoodModel::log_lik(const ParamVector&, Observation) const { return log_c_; }

void ConstantLikelihoodModel::add_grad_log_lik(const ParamVector&, Observation, double,
                                               Eigen::Ref<Eigen::VectorXd>) const {}

void ConstantLikelihoodModel::sample_observation(const ParamVector&, RngStream& rng,
                                                 std::span<double> out) const {
  out[0] = rng.normal();
}

double FixedDensityModel::log_prior(const ParamVector& theta) const { return std_normal_log_prior(theta); }

ParamVector FixedDensityModel::grad_log_prior(const ParamVector& theta) const { return -theta; }

ParamVector FixedDensityModel::sample_prior(RngStream& rng) const { return std_normal_sample(1, rng); }

double FixedDensityModel::log_lik(const ParamVector&, Observation obs) const {
  return log_normal_pdf(obs[0], 0.0, 1.0);
}

void FixedDensityModel::add_grad_log_lik(const ParamVector&, Observation, double,
                                         Eigen::Ref<Eigen::VectorXd>) const {}

void FixedDensityModel::sample_observation(const ParamVector&, RngStream& rng,
                                           std::span<double> out) const {
  out[0] = rng.normal();
}

// ---------------------------------------------------------------------------

namespace {

std::size_t parse_count(std::string_view text, std::string_view id) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value == 0) {
    throw UsageError("unknown model id '" + std::string(id) + "'");
  }
  return value;
}

}  // namespace

std::unique_ptr<BayesModel> make_model(std::string_view id) {
  if (id == "linreg") return std::make_unique<LinRegModel>();
  if (id == "logreg") return std::make_unique<LogRegModel>();
  if (id == "gmm") return std::make_unique<GmmModel>();
  if (id == "gaussian-mean") return std::make_unique<GaussianMeanModel>();
  if (id == "fixed-density") return std::make_unique<FixedDensityModel>();
  if (id.starts_with("gmm:")) {
    const std::string_view rest = id.substr(4);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) throw UsageError("unknown model id '" + std::string(id) + "'");
    return std::make_unique<GmmModel>(parse_count(rest.substr(0, colon), id),
                                      parse_count(rest.substr(colon + 1), id));
  }
  if (id.starts_with("constant:")) {
    const std::string text(id.substr(9));
    std::size_t used = 0;
    double log_c = 0.0;
    try {
      log_c = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size() || text.empty()) throw UsageError("unknown model id '" + std::string(id) + "'");
    return std::make_unique<ConstantLikelihoodModel>(log_c);
  }
  throw UsageError("unknown model id '" + std::string(id) + "'");
}

double linreg_log_ml_exact(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double noise_var) {
  if (x.rows() != y.size() || x.rows() == 0) throw UsageError("linreg_log_ml_exact: shape mismatch");
  if (!(noise_var > 0.0)) throw UsageError("linreg_log_ml_exact: noise variance must be positive");
  if (!x.allFinite() || !y.allFinite()) throw UsageError("linreg_log_ml_exact: non-finite input");
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols() + 1;
  Eigen::MatrixXd design(n, p);
  design.leftCols(x.cols()) = x;
  design.col(p - 1).setOnes();
  Eigen::MatrixXd a = design.transpose() * design;
  a.diagonal().array() += noise_var;
  const Eigen::VectorXd xty = design.transpose() * y;
  const Eigen::LLT<Eigen::MatrixXd> llt(a);
  const double log_det_a = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double log_det = log_det_a - static_cast<double>(p) * std::log(noise_var);
  const double quad = (y.squaredNorm() - xty.dot(llt.solve(xty))) / noise_var;
  return -0.5 * (static_cast<double>(n) * (kLog2Pi + std::log(noise_var)) + log_det + quad);
}

double linreg_log_ml_exact(const ObsView& data, double noise_var) {
  if (data.empty() || data.arity() < 2) throw UsageError("linreg_log_ml_exact: empty data");
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto d = static_cast<Eigen::Index>(data.arity() - 1);
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Observation row = data[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = row[static_cast<std::size_t>(j)];
    y[i] = row[static_cast<std::size_t>(d)];
  }
  return linreg_log_ml_exact(x, y, noise_var);
}

double gaussian_mean_log_ml_exact(const ObsView& data, double prior_var, double noise_var) {
  if (data.empty()) throw UsageError("gaussian_mean_log_ml_exact: empty data");
  const auto n = static_cast<double>(data.size());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    sum += data[i][0];
    sum_sq += data[i][0] * data[i][0];
  }
  const double quad = (sum_sq - prior_var * sum * sum / (noise_var + n * prior_var)) / noise_var;
  return -0.5 * (n * (kLog2Pi + std::log(noise_var)) + std::log1p(n * prior_var / noise_var) + quad);
}

Dataset generate_observations(const BayesModel& model, const ParamVector& truth, std::size_t n,
                              RngStream& rng) {
  check_dim(model, truth);
  DatasetHeader header;
  header.model = model.name();
  header.arity = static_cast<std::uint32_t>(model.obs_arity());
  header.seed = rng.seed();
  header.true_params.assign(truth.data(), truth.data() + truth.size());
  Dataset dataset(std::move(header));
  dataset.reserve(n);
  std::vector<double> row(model.obs_arity());
  for (std::size_t i = 0; i < n; ++i) {
    model.sample_observation(truth, rng, row);
    dataset.append(row);
  }
  return dataset;
}

}  // namespace sgais::models
