#include "sgais/model.hpp"

#include "sgais/errors.hpp"

namespace sgais {

void BayesModel::validate_observation(Observation obs) const {
  if (obs.size() != obs_arity()) {
    throw UsageError(name() + ": observation arity " + std::to_string(obs.size()) +
                     ", expected " + std::to_string(obs_arity()));
  }
}

double BayesModel::sum_log_lik(const ParamVector& theta, const ObsView& data) const {
  double total = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) total += log_lik(theta, data[n]);
  return total;
}

void BayesModel::add_grad_sum_log_lik(const ParamVector& theta, const ObsView& data, double scale,
                                      Eigen::Ref<Eigen::VectorXd> grad) const {
  for (std::size_t n = 0; n < data.size(); ++n) add_grad_log_lik(theta, data[n], scale, grad);
}

ParamVector BayesModel::grad_log_lik(const ParamVector& theta, Observation obs) const {
  ParamVector grad = ParamVector::Zero(static_cast<Eigen::Index>(dim()));
  add_grad_log_lik(theta, obs, 1.0, grad);
  return grad;
}

}  // namespace sgais
