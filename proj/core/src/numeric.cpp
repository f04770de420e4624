#include "sgais/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sgais/errors.hpp"

namespace sgais {

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw UsageError("log_sum_exp: empty input");
  const double max = *std::max_element(values.begin(), values.end());
  if (max == -std::numeric_limits<double>::infinity()) return max;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

double log_mean_exp(std::span<const double> values) {
  return log_sum_exp(values) - std::log(static_cast<double>(values.size()));
}

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

ParamVector finite_diff_grad(const std::function<double(const ParamVector&)>& f,
                             const ParamVector& theta, double h) {
  if (!(h > 0.0)) throw UsageError("finite_diff_grad: step must be positive");
  ParamVector grad(theta.size());
  ParamVector probe = theta;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    probe[j] = theta[j] + h;
    const double up = f(probe);
    probe[j] = theta[j] - h;
    const double down = f(probe);
    probe[j] = theta[j];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("finite_diff_grad: non-finite evaluation at coordinate " +
                             std::to_string(j),
                         static_cast<std::size_t>(j));
    }
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace sgais
