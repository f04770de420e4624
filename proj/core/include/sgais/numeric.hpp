#pragma once

#include <functional>
#include <span>

#include <Eigen/Core>

namespace sgais {

/// Model parameters in unconstrained space.
using ParamVector = Eigen::VectorXd;

/// log(sum(exp(values))) with max-shift. Returns -inf when every entry is -inf.
/// Throws UsageError on empty input.
double log_sum_exp(std::span<const double> values);

/// log_sum_exp(values) - log(values.size()).
double log_mean_exp(std::span<const double> values);

/// log(exp(a) + exp(b)), -inf aware.
double log_add_exp(double a, double b);

/// Central-difference gradient of `f` at `theta` with step `h`.
/// Throws NumericError (carrying the coordinate) when an evaluation is not finite.
ParamVector finite_diff_grad(const std::function<double(const ParamVector&)>& f,
                             const ParamVector& theta, double h = 1e-5);

/// log N(x; mean, var) for scalars.
double log_normal_pdf(double x, double mean, double var);

/// Logistic sigmoid.
double sigmoid(double x);

}  // namespace sgais
