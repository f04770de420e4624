#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <gtest/gtest.h>

#include "sgais/errors.hpp"
#include "sgais/models.hpp"
#include "sgais/numeric.hpp"

using namespace sgais;
using namespace sgais::models;

namespace {

// |g - fd| <= 1e-5 * max(|g|, |fd|) + 1e-8, coordinatewise.
void expect_gradients_match(const ParamVector& analytic, const ParamVector& numeric, const char* what) {
  ASSERT_EQ(analytic.size(), numeric.size());
  for (Eigen::Index j = 0; j < analytic.size(); ++j) {
    const double tol = 1e-5 * std::max(std::abs(analytic[j]), std::abs(numeric[j])) + 1e-8;
    ASSERT_NEAR(analytic[j], numeric[j], tol) << what << " coordinate " << j;
  }
}

// Random parameter near the bulk of the prior, avoiding extreme variances.
ParamVector random_theta(const BayesModel& model, RngStream& rng) {
  ParamVector t(static_cast<Eigen::Index>(model.dim()));
  for (Eigen::Index j = 0; j < t.size(); ++j) t[j] = 0.8 * rng.normal();
  return t;
}

void check_model_gradients(const BayesModel& model, std::uint64_t seed) {
  RngStream rng(seed, 11);
  RngStream data_rng(seed, 12);
  const ParamVector truth = random_theta(model, data_rng);
  const Dataset data = generate_observations(model, truth, 8, data_rng);
  for (int point = 0; point < 100; ++point) {
    const ParamVector theta = random_theta(model, rng);
    const Observation obs = data.row(static_cast<std::size_t>(point) % data.size());
    expect_gradients_match(model.grad_log_lik(theta, obs),
                           finite_diff_grad([&](const ParamVector& t) { return model.log_lik(t, obs); }, theta),
                           "log_lik");
    expect_gradients_match(model.grad_log_prior(theta),
                           finite_diff_grad([&](const ParamVector& t) { return model.log_prior(t); }, theta),
                           "log_prior");
    ParamVector batch = ParamVector::Zero(theta.size());
    model.add_grad_sum_log_lik(theta, data.view(), 1.0, batch);
    expect_gradients_match(
        batch, finite_diff_grad([&](const ParamVector& t) { return model.sum_log_lik(t, data.view()); }, theta),
        "sum_log_lik");
  }
}

}  // namespace

TEST(ModelGradients, LinReg) { check_model_gradients(LinRegModel(), 1); }
TEST(ModelGradients, LinRegOtherNoise) { check_model_gradients(LinRegModel(0.3, 3), 2); }
TEST(ModelGradients, LogReg) { check_model_gradients(LogRegModel(), 3); }
TEST(ModelGradients, Gmm) { check_model_gradients(GmmModel(), 4); }
TEST(ModelGradients, Gmm1d) { check_model_gradients(GmmModel(3, 1), 5); }
TEST(ModelGradients, GaussianMean) { check_model_gradients(GaussianMeanModel(2.0, 0.5), 6); }

TEST(Models, Dimensions) {
  EXPECT_EQ(LinRegModel().dim(), 6u);
  EXPECT_EQ(LogRegModel().dim(), 44u);
  EXPECT_EQ(GmmModel().dim(), 25u);
  EXPECT_EQ(GmmModel(3, 1).dim(), 9u);
  EXPECT_EQ(make_model("gmm:3:1")->dim(), 9u);
  EXPECT_EQ(make_model("linreg")->name(), "linreg");
  EXPECT_THROW(make_model("nonsense"), UsageError);
}

TEST(LinReg, ZeroParametersZeroResponse) {
  const LinRegModel m(2.5);
  const std::vector<double> obs{0.3, -1.0, 4.0, 2.0, 7.0, 0.0};
  EXPECT_NEAR(m.log_lik(ParamVector::Zero(6), obs), -0.5 * std::log(2.0 * std::numbers::pi * 2.5), 1e-14);
}

TEST(LogReg, ZeroParametersGiveUniformClasses) {
  const LogRegModel m;
  RngStream rng(1, 1);
  for (int label = 0; label < 4; ++label) {
    std::vector<double> obs(11);
    for (int j = 0; j < 10; ++j) obs[j] = rng.normal();
    obs[10] = label;
    EXPECT_NEAR(m.log_lik(ParamVector::Zero(44), obs), -std::log(4.0), 1e-14);
  }
}

TEST(LogReg, ProbabilitiesSumToOne) {
  const LogRegModel m;
  RngStream rng(2, 1);
  for (int i = 0; i < 50; ++i) {
    const ParamVector theta = random_theta(m, rng);
    std::vector<double> x(10);
    for (auto& v : x) v = 3.0 * rng.normal();
    EXPECT_NEAR(m.class_probabilities(theta, x).sum(), 1.0, 1e-12);
  }
}

TEST(LogReg, RejectsBadLabels) {
  const LogRegModel m;
  std::vector<double> obs(11, 0.0);
  obs[10] = 4.0;
  EXPECT_THROW(m.validate_observation(obs), UsageError);
  obs[10] = 1.5;
  EXPECT_THROW(m.validate_observation(obs), UsageError);
}

TEST(Gmm, IdenticalComponentsCollapseToOneGaussian) {
  const GmmModel m(4, 2);
  const std::vector<double> weights{0.1, 0.2, 0.3, 0.4};
  const std::vector<double> means{1.0, -2.0, 1.0, -2.0, 1.0, -2.0, 1.0, -2.0};
  const std::vector<double> vars{0.5, 3.0, 0.5, 3.0, 0.5, 3.0, 0.5, 3.0};
  const ParamVector theta = m.pack(weights, means, vars);
  const std::vector<double> y{0.4, 1.1};
  const double expected = log_normal_pdf(0.4, 1.0, 0.5) + log_normal_pdf(1.1, -2.0, 3.0);
  EXPECT_NEAR(m.log_lik(theta, y), expected, 1e-12);
}

TEST(Gmm, LogSumExpMatchesDirectSum) {
  const GmmModel m(3, 2);
  const std::vector<double> weights{0.2, 0.5, 0.3};
  const std::vector<double> means{0.0, 0.0, 2.0, 1.0, -1.0, 3.0};
  const std::vector<double> vars{1.0, 2.0, 0.5, 0.7, 1.5, 1.0};
  const ParamVector theta = m.pack(weights, means, vars);
  const std::vector<double> y{0.7, 1.3};
  double direct = 0.0;
  for (int k = 0; k < 3; ++k) {
    direct += weights[k] * std::exp(log_normal_pdf(y[0], means[2 * k], vars[2 * k]) +
                                    log_normal_pdf(y[1], means[2 * k + 1], vars[2 * k + 1]));
  }
  EXPECT_NEAR(m.log_lik(theta, y), std::log(direct), 1e-10);
}

TEST(Gmm, ComponentPermutationInvariance) {
  const GmmModel m(3, 2);
  RngStream rng(9, 1);
  const ParamVector theta = random_theta(m, rng);
  const std::vector<std::size_t> perm{2, 0, 1};
  ParamVector permuted(theta.size());
  for (std::size_t k = 0; k < 3; ++k) {
    permuted[m.logit_index(k)] = theta[m.logit_index(perm[k])];
    for (std::size_t j = 0; j < 2; ++j) {
      permuted[m.mean_index(k, j)] = theta[m.mean_index(perm[k], j)];
      permuted[m.log_var_index(k, j)] = theta[m.log_var_index(perm[k], j)];
    }
  }
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> y{2.0 * rng.normal(), 2.0 * rng.normal()};
    EXPECT_NEAR(m.log_lik(theta, y), m.log_lik(permuted, y), 1e-12);
  }
  EXPECT_NEAR(m.log_prior(theta), m.log_prior(permuted), 1e-12);
}

TEST(Gmm, DensityIntegratesToOne) {
  const GmmModel m(3, 2);
  const std::vector<double> weights{0.3, 0.3, 0.4};
  const std::vector<double> means{0.0, 0.0, 3.0, -1.0, -2.0, 2.0};
  const std::vector<double> vars{1.0, 0.5, 0.8, 1.2, 0.6, 0.9};
  const ParamVector theta = m.pack(weights, means, vars);
  // Grid over +-10 marginal standard deviations around the mixture.
  const double lo_x = -2.0 - 10.0 * std::sqrt(1.0) - 1.0;
  const double hi_x = 3.0 + 10.0 * std::sqrt(1.0) + 1.0;
  const double lo_y = -1.0 - 10.0 * std::sqrt(1.2) - 1.0;
  const double hi_y = 2.0 + 10.0 * std::sqrt(1.2) + 1.0;
  const int steps = 600;
  const double hx = (hi_x - lo_x) / steps;
  const double hy = (hi_y - lo_y) / steps;
  double total = 0.0;
  for (int i = 0; i < steps; ++i) {
    for (int j = 0; j < steps; ++j) {
      const std::vector<double> y{lo_x + (i + 0.5) * hx, lo_y + (j + 0.5) * hy};
      total += std::exp(m.log_lik(theta, y)) * hx * hy;
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-3);
}

TEST(Gmm, LogitPriorIntegratesToOne) {
  // K = 2, D = 1: fix means and log-variances, integrate the logit part over R^2.
  const GmmModel m(2, 1);
  ParamVector theta = ParamVector::Zero(6);
  const double rest = [&] {
    // The logit density alone: subtract the mean / variance terms, which do not depend on logits.
    ParamVector t = theta;
    double base = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
      const double s = t[m.log_var_index(k, 0)];
      const double var = std::exp(s);
      base += log_normal_pdf(t[m.mean_index(k, 0)], 0.0, 4.0 * var) + (-s - std::exp(-s));
    }
    return base;
  }();
  const double lim = 60.0;
  const int steps = 1200;
  const double h = 2.0 * lim / steps;
  double total = 0.0;
  for (int i = 0; i < steps; ++i) {
    for (int j = 0; j < steps; ++j) {
      theta[0] = -lim + (i + 0.5) * h;
      theta[1] = -lim + (j + 0.5) * h;
      total += std::exp(m.log_prior(theta) - rest) * h * h;
    }
  }
  EXPECT_NEAR(total, 1.0, 2e-3);
}

TEST(Gmm, WellSeparatedClustersRecovered) {
  const GmmModel m(3, 2);
  const std::vector<double> weights{0.2, 0.3, 0.5};
  const std::vector<double> means{0.0, 0.0, 20.0, 0.0, 0.0, 20.0};
  const std::vector<double> vars(6, 1.0);
  const ParamVector truth = m.pack(weights, means, vars);
  RngStream rng(5, 1);
  const std::size_t n = 5000;
  const Dataset d = generate_observations(m, truth, n, rng);
  // Nearest-mean assignment; a point is recovered when it lies within 4 sd of its mean.
  std::vector<double> counts(3, 0.0);
  std::size_t recovered = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = d.row(i);
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t k = 0; k < 3; ++k) {
      const double dist = std::hypot(y[0] - means[2 * k], y[1] - means[2 * k + 1]);
      if (dist < best_d) {
        best_d = dist;
        best = k;
      }
    }
    counts[best] += 1.0;
    recovered += best_d < 4.0;
  }
  EXPECT_GT(static_cast<double>(recovered) / n, 0.99);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_LT(std::abs(counts[k] - n * weights[k]), 3.0 * std::sqrt(n * weights[k] * (1 - weights[k]))) << k;
  }
}

TEST(Models, BatchSumsMatchPerObservationAndPermutation) {
  for (const char* id : {"linreg", "logreg", "gmm", "gmm:3:1", "gaussian-mean"}) {
    const auto model = make_model(id);
    RngStream rng(3, 3);
    const ParamVector truth = random_theta(*model, rng);
    const Dataset data = generate_observations(*model, truth, 40, rng);
    const ParamVector theta = random_theta(*model, rng);
    double direct = 0.0;
    ParamVector grad_direct = ParamVector::Zero(theta.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      direct += model->log_lik(theta, data.row(i));
      model->add_grad_log_lik(theta, data.row(i), 1.0, grad_direct);
    }
    EXPECT_NEAR(model->sum_log_lik(theta, data.view()), direct, 1e-9 * std::abs(direct)) << id;
    ParamVector grad = ParamVector::Zero(theta.size());
    model->add_grad_sum_log_lik(theta, data.view(), 1.0, grad);
    EXPECT_LE((grad - grad_direct).norm(), 1e-9 * (1.0 + grad_direct.norm())) << id;

    std::vector<std::size_t> reversed(data.size());
    std::iota(reversed.rbegin(), reversed.rend(), std::size_t{0});
    EXPECT_NEAR(model->sum_log_lik(theta, data.view().select(reversed)), direct, 1e-9 * std::abs(direct)) << id;
  }
}

TEST(LinRegExact, SingleZeroObservation) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, 5);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(1);
  EXPECT_NEAR(linreg_log_ml_exact(x, y, 1.0), -0.5 * std::log(4.0 * std::numbers::pi), 1e-13);
  EXPECT_NEAR(linreg_log_ml_exact(x, y, 1.0), -1.2655121234846454, 1e-13);
}

TEST(LinRegExact, ZeroResponseDropsQuadraticTerm) {
  RngStream rng(4, 1);
  const int n = 30;
  const double s2 = 0.7;
  Eigen::MatrixXd x(n, 5);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 5; ++j) x(i, j) = rng.normal();
  }
  Eigen::MatrixXd xt(n, 6);
  xt << x, Eigen::VectorXd::Ones(n);
  const Eigen::MatrixXd inner = Eigen::MatrixXd::Identity(6, 6) + xt.transpose() * xt / s2;
  const double expected = -0.5 * (n * std::log(2.0 * std::numbers::pi * s2) + std::log(inner.determinant()));
  EXPECT_NEAR(linreg_log_ml_exact(x, Eigen::VectorXd::Zero(n), s2), expected, 1e-10);
}

class LinRegBruteForce : public ::testing::TestWithParam<std::pair<int, double>> {};

TEST_P(LinRegBruteForce, MatchesDenseCovariance) {
  const auto [n, s2] = GetParam();
  const LinRegModel model(s2);
  RngStream rng(static_cast<std::uint64_t>(n), 2);
  const ParamVector truth = model.sample_prior(rng);
  const Dataset data = generate_observations(model, truth, static_cast<std::size_t>(n), rng);
  Eigen::MatrixXd xt(n, 6);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const auto row = data.row(static_cast<std::size_t>(i));
    for (int j = 0; j < 5; ++j) xt(i, j) = row[j];
    xt(i, 5) = 1.0;
    y[i] = row[5];
  }
  // log N(y; 0, s2 I + X X^T) directly on the N x N covariance.
  const Eigen::MatrixXd cov = s2 * Eigen::MatrixXd::Identity(n, n) + xt * xt.transpose();
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const double log_det = ldlt.vectorD().array().log().sum();
  const double quad = y.dot(ldlt.solve(y));
  const double brute = -0.5 * (n * std::log(2.0 * std::numbers::pi) + log_det + quad);
  EXPECT_NEAR(linreg_log_ml_exact(data.view(), s2), brute, 1e-8);
}

INSTANTIATE_TEST_SUITE_P(Sizes, LinRegBruteForce,
                         ::testing::Values(std::pair{1, 1.0}, std::pair{7, 1.0}, std::pair{200, 1.0},
                                           std::pair{200, 2.5}, std::pair{500, 1.0}, std::pair{500, 0.4}));

TEST(GaussianMeanExact, MatchesDenseCovariance) {
  const double tau2 = 1.7;
  const double s2 = 0.6;
  RngStream rng(3, 1);
  const int n = 50;
  std::vector<double> ys(n);
  for (auto& v : ys) v = 0.4 + std::sqrt(s2) * rng.normal();
  const Eigen::MatrixXd cov = s2 * Eigen::MatrixXd::Identity(n, n) + tau2 * Eigen::MatrixXd::Ones(n, n);
  const Eigen::Map<const Eigen::VectorXd> y(ys.data(), n);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const double brute =
      -0.5 * (n * std::log(2.0 * std::numbers::pi) + ldlt.vectorD().array().log().sum() + y.dot(ldlt.solve(y)));
  EXPECT_NEAR(gaussian_mean_log_ml_exact(ObsView(ys, 1), tau2, s2), brute, 1e-9);
}

TEST(Generate, LinRegZeroParametersMeanResponseNearZero) {
  const LinRegModel m;
  RngStream rng(8, 1);
  const std::size_t n = 20000;
  const Dataset d = generate_observations(m, ParamVector::Zero(6), n, rng);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += d.row(i)[5];
  mean /= static_cast<double>(n);
  EXPECT_LT(std::abs(mean), 3.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_EQ(d.header().model, "linreg");
  EXPECT_EQ(d.arity(), 6u);
}

TEST(Generate, LogRegZeroParametersUniformClasses) {
  const LogRegModel m;
  RngStream rng(8, 2);
  const std::size_t n = 40000;
  const Dataset d = generate_observations(m, ParamVector::Zero(44), n, rng);
  std::vector<double> counts(4, 0.0);
  for (std::size_t i = 0; i < n; ++i) counts[static_cast<std::size_t>(d.row(i)[10])] += 1.0;
  const double p = 0.25;
  const double sd = std::sqrt(n * p * (1 - p));
  for (double c : counts) EXPECT_LT(std::abs(c - n * p), 3.0 * sd);
}
