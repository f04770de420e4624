#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "sgais/data.hpp"
#include "sgais/errors.hpp"
#include "sgais/models.hpp"
#include "sgais/numeric.hpp"
#include "sgais/sgais.hpp"

using namespace sgais;
using namespace sgais::models;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double ess_closed_form_two(double l, double d) {
  const double r = std::exp(d * l);
  return (1.0 + r) * (1.0 + r) / (1.0 + r * r);
}

ParticleEnsemble ensemble_with_weights(std::vector<double> log_weights) {
  ParticleEnsemble e;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    e.particles.push_back({ParamVector::Constant(1, static_cast<double>(i)), ParamVector::Zero(1)});
  }
  e.log_weights = std::move(log_weights);
  return e;
}

SgaisResult run_on(const BayesModel& model, const Dataset& data, const EstimatorConfig& config) {
  auto stream = data::DataStream::from_dataset(data, config.chunk_size);
  return sgais_run(model, stream, config);
}

Dataset linreg_data(std::size_t n, std::uint64_t seed) {
  const LinRegModel model;
  RngStream truth_rng(seed, streams::kTruth);
  RngStream data_rng(seed, streams::kData);
  return generate_observations(model, model.sample_prior(truth_rng), n, data_rng);
}

}  // namespace

TEST(IncrementalEss, EqualIncrementsGiveM) {
  const std::vector<double> incr(7, -12.5);
  for (double d : {0.0, 0.3, 1.0}) EXPECT_NEAR(incremental_ess(incr, d), 7.0, 1e-12);
}

TEST(IncrementalEss, ZeroDeltaGivesM) {
  const std::vector<double> incr{-1.0, -50.0, 3.0, -1e4};
  EXPECT_NEAR(incremental_ess(incr, 0.0), 4.0, 1e-12);
}

TEST(IncrementalEss, TwoParticleClosedForm) {
  const std::vector<double> incr{0.0, -2.0};
  EXPECT_NEAR(incremental_ess(incr, 1.0), 1.26580222883, 1e-10);
  EXPECT_NEAR(incremental_ess(incr, 1.0), ess_closed_form_two(-2.0, 1.0), 1e-13);
  EXPECT_NEAR(incremental_ess(incr, 0.37), ess_closed_form_two(-2.0, 0.37), 1e-13);
}

TEST(IncrementalEss, BoundsAndShiftInvariance) {
  RngStream rng(4, 4);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 2 + rng.index(30);
    std::vector<double> incr(m);
    for (auto& v : incr) v = 200.0 * rng.normal();
    const double d = rng.uniform();
    const double ess = incremental_ess(incr, d);
    ASSERT_GE(ess, 1.0);
    ASSERT_LE(ess, static_cast<double>(m));
    std::vector<double> shifted = incr;
    const double c = 1e3 * rng.normal();
    for (auto& v : shifted) v += c;
    ASSERT_NEAR(incremental_ess(shifted, d), ess, 1e-9 * ess);
  }
}

TEST(IncrementalEss, EmptyIsUsageError) {
  EXPECT_THROW(incremental_ess(std::vector<double>{}, 0.5), UsageError);
}

TEST(SolveAnnealingStep, EqualIncrementsFinishChunk) {
  const std::vector<double> incr(5, -3.0);
  EXPECT_EQ(solve_annealing_step(incr, 0.25, 5.0), 0.75);
}

TEST(SolveAnnealingStep, UnitTargetAlwaysFinishes) {
  const std::vector<double> incr{0.0, -1e6, -3.0};
  EXPECT_EQ(solve_annealing_step(incr, 0.0, 1.0), 1.0);
  EXPECT_EQ(solve_annealing_step(incr, 0.6, 1.0), 1.0 - 0.6);
}

TEST(SolveAnnealingStep, TwoParticleRoot) {
  // (1 + r)^2 / (1 + r^2) = 1.8 gives 0.8 r^2 - 2 r + 0.8 = 0, so r = 1/2.
  const std::vector<double> incr{0.0, -10.0};
  const double delta = solve_annealing_step(incr, 0.0, 1.8);
  EXPECT_NEAR(delta, std::numbers::ln2 / 10.0, 1e-9);
  EXPECT_NEAR(incremental_ess(incr, delta), 1.8, 1e-8);
}

TEST(SolveAnnealingStep, UnreachableTargetIsUsageError) {
  const std::vector<double> incr{0.0, -1.0};
  EXPECT_THROW(solve_annealing_step(incr, 0.0, 3.0), UsageError);
  EXPECT_THROW(solve_annealing_step(incr, 1.0, 1.5), UsageError);
}

TEST(UpdateLogWeights, Arithmetic) {
  ParticleEnsemble e = ensemble_with_weights({0.0, 0.0});
  update_log_weights(e, std::vector<double>{-1.0, -3.0}, 0.5);
  EXPECT_EQ(e.log_weights, (std::vector<double>{-0.5, -1.5}));
  update_log_weights(e, std::vector<double>{0.0, 0.0}, 1.0);
  EXPECT_EQ(e.log_weights, (std::vector<double>{-0.5, -1.5}));
}

TEST(UpdateLogWeights, RejectsBadInputs) {
  ParticleEnsemble e = ensemble_with_weights({0.0, 0.0});
  EXPECT_THROW(update_log_weights(e, std::vector<double>{0.0}, 0.5), UsageError);
  EXPECT_THROW(update_log_weights(e, std::vector<double>{0.0, 0.0}, 0.0), UsageError);
  EXPECT_THROW(update_log_weights(e, std::vector<double>{0.0, std::nan("")}, 0.5), NumericError);
}

TEST(SystematicResample, UniformWeightsGivePermutation) {
  ParticleEnsemble e = ensemble_with_weights(std::vector<double>(6, -2.0));
  RngStream rng(1, 1);
  auto ancestors = systematic_resample(e, rng);
  std::sort(ancestors.begin(), ancestors.end());
  std::vector<std::size_t> identity(6);
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  EXPECT_EQ(ancestors, identity);
}

TEST(SystematicResample, SingleSurvivor) {
  ParticleEnsemble e = ensemble_with_weights({0.0, kNegInf, kNegInf});
  RngStream rng(1, 1);
  EXPECT_EQ(systematic_resample(e, rng), (std::vector<std::size_t>{0, 0, 0}));
  for (const auto& p : e.particles) EXPECT_EQ(p.position[0], 0.0);
}

TEST(SystematicResample, UnbiasedSelectionCounts) {
  RngStream rng(2, 2);
  std::vector<double> counts(3, 0.0);
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    ParticleEnsemble e = ensemble_with_weights({std::log(0.5), std::log(0.3), std::log(0.2)});
    for (std::size_t a : systematic_resample(e, rng)) counts[a] += 1.0;
  }
  EXPECT_NEAR(counts[0] / trials, 1.5, 0.02);
  EXPECT_NEAR(counts[1] / trials, 0.9, 0.02);
  EXPECT_NEAR(counts[2] / trials, 0.6, 0.02);
}

TEST(SystematicResample, EvidenceInvariant) {
  RngStream rng(3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> lw(2 + rng.index(20));
    for (auto& v : lw) v = -1e3 + 30.0 * rng.normal();
    ParticleEnsemble e = ensemble_with_weights(lw);
    const double before = e.log_evidence();
    systematic_resample(e, rng);
    ASSERT_NEAR(e.log_evidence(), before, 1e-12 * std::abs(before));
  }
}

TEST(SystematicResample, AllZeroWeightsAreDegenerate) {
  ParticleEnsemble e = ensemble_with_weights({kNegInf, kNegInf});
  RngStream rng(1, 1);
  EXPECT_THROW(systematic_resample(e, rng), DegenerateEnsembleError);
}

TEST(ChunkUpdate, ConstantLikelihoodTakesOneExactStep) {
  const ConstantLikelihoodModel model(-0.75, 2);
  Dataset data(DatasetHeader{.model = model.name(), .arity = 1});
  for (int i = 0; i < 40; ++i) data.append(std::vector<double>{0.0});
  EstimatorConfig config;
  config.chunk_size = 40;
  const SgaisResult r = run_on(model, data, config);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.trace[0].steps, 1u);
  EXPECT_EQ(r.trace[0].lambdas, std::vector<double>{1.0});
  EXPECT_NEAR(r.log_z, 40 * -0.75, 1e-12);
}

TEST(ChunkUpdate, PeakedFirstChunkAnnealsInSeveralSteps) {
  const LinRegModel model;
  const Dataset data = linreg_data(500, 3);
  EstimatorConfig config;
  const SgaisResult r = run_on(model, data, config);
  ASSERT_EQ(r.trace.size(), 1u);
  const auto& lambdas = r.trace[0].lambdas;
  EXPECT_GT(r.trace[0].steps, 1u);
  EXPECT_EQ(r.trace[0].steps, lambdas.size());
  EXPECT_GT(lambdas.front(), 0.0);
  for (std::size_t t = 1; t < lambdas.size(); ++t) EXPECT_GT(lambdas[t], lambdas[t - 1]);
  EXPECT_EQ(lambdas.back(), 1.0);
}

TEST(ChunkUpdate, UnitEssTargetGivesOneStepPerChunk) {
  const LinRegModel model;
  const Dataset data = linreg_data(2000, 4);
  EstimatorConfig config;
  config.ess_target = 1.0;
  const SgaisResult r = run_on(model, data, config);
  ASSERT_EQ(r.trace.size(), 4u);
  for (const auto& rec : r.trace) {
    EXPECT_EQ(rec.steps, 1u);
    EXPECT_EQ(rec.lambdas.back(), 1.0);
  }
}

TEST(ChunkUpdate, StepGuardStopsRunawayAnnealing) {
  const LinRegModel model;
  const Dataset data = linreg_data(500, 3);
  EstimatorConfig config;
  config.max_anneal_steps = 1;
  EXPECT_THROW(run_on(model, data, config), Error);
}

TEST(SgaisRun, FixedDensityEvidenceIsExact) {
  const FixedDensityModel model;
  RngStream rng(6, 1);
  const Dataset data = generate_observations(model, ParamVector::Zero(1), 1234, rng);
  double expected = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) expected += model.log_lik(ParamVector::Zero(1), data.row(i));
  const SgaisResult r = run_on(model, data, EstimatorConfig{});
  EXPECT_NEAR(r.log_z, expected, 1e-9 * std::abs(expected));
  ASSERT_EQ(r.trace.size(), 3u);
  EXPECT_EQ(r.trace[0].n_consumed, 500u);
  EXPECT_EQ(r.trace[1].n_consumed, 1000u);
  EXPECT_EQ(r.trace[2].n_consumed, 1234u);
}

TEST(SgaisRun, SingleJumpOnConjugateRegressionIsUnbiased) {
  // One chunk, lambda jumps straight to 1: plain importance sampling from the prior.
  const LinRegModel model;
  const std::size_t n = 3;
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset data = linreg_data(n, 100);
    EstimatorConfig config;
    config.chunk_size = n;
    config.ess_target = 1.0;
    config.particles = 10;
    config.seed = seed;
    const double exact = linreg_log_ml_exact(data.view(), 1.0);
    ratios.push_back(std::exp(run_on(model, data, config).log_z - exact));
  }
  const double mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) / ratios.size();
  double var = 0.0;
  for (double r : ratios) var += (r - mean) * (r - mean);
  const double se = std::sqrt(var / (ratios.size() - 1) / ratios.size());
  EXPECT_LE(std::abs(mean - 1.0), 3.0 * se + 1e-12) << "mean ratio " << mean << " se " << se;
}

TEST(SgaisRun, ErrorShrinksWithMoreParticles) {
  const LinRegModel model;
  const std::size_t n = 5000;
  std::vector<double> mean_error;
  for (std::size_t m : {2u, 10u, 50u}) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Dataset data = linreg_data(n, 200 + seed);
      EstimatorConfig config;
      config.particles = m;
      config.ess_target = std::max(1.0, m / 2.0);
      config.seed = seed;
      total += std::abs(run_on(model, data, config).log_z - linreg_log_ml_exact(data.view(), 1.0)) / n;
    }
    mean_error.push_back(total / 10.0);
  }
  EXPECT_GT(mean_error[0], mean_error[1]);
  EXPECT_GT(mean_error[1], mean_error[2]);
}

TEST(SgaisRun, DeterministicAndThreadInvariant) {
  const GmmModel model(3, 1);
  RngStream rng(7, 1);
  const Dataset data = generate_observations(model, model.sample_prior(rng), 1500, rng);
  EstimatorConfig config;
  config.seed = 11;
  const SgaisResult a = run_on(model, data, config);
  const SgaisResult b = run_on(model, data, config);
  config.threads = 3;
  const SgaisResult c = run_on(model, data, config);
  ASSERT_EQ(a.trace.size(), c.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].lambdas, b.trace[i].lambdas);
    EXPECT_EQ(a.trace[i].lambdas, c.trace[i].lambdas);
    EXPECT_EQ(a.trace[i].log_z_after, c.trace[i].log_z_after);
  }
  for (std::size_t i = 0; i < a.ensemble.size(); ++i) {
    EXPECT_EQ(a.ensemble.particles[i].position, c.ensemble.particles[i].position);
  }
}

TEST(SgaisRun, LargeReservoirMatchesFullHistory) {
  const LinRegModel model;
  const Dataset data = linreg_data(2000, 8);
  EstimatorConfig config;
  const SgaisResult full = run_on(model, data, config);
  config.history = HistoryMode::kReservoir;
  config.reservoir_capacity = 5000;
  const SgaisResult res = run_on(model, data, config);
  EXPECT_EQ(full.log_z, res.log_z);
}

TEST(SgaisRun, SmallReservoirStillTracksEvidence) {
  const LinRegModel model;
  const Dataset data = linreg_data(5000, 9);
  EstimatorConfig config;
  config.history = HistoryMode::kReservoir;
  config.reservoir_capacity = 1000;
  const double exact = linreg_log_ml_exact(data.view(), 1.0);
  EXPECT_LT(std::abs(run_on(model, data, config).log_z - exact) / std::abs(exact), 0.02);
}

TEST(SgaisRun, ResamplingKeepsAccuracy) {
  const LinRegModel model;
  const Dataset data = linreg_data(5000, 10);
  EstimatorConfig config;
  config.resampling.enabled = true;
  const double exact = linreg_log_ml_exact(data.view(), 1.0);
  EXPECT_LT(std::abs(run_on(model, data, config).log_z - exact) / std::abs(exact), 0.02);
}

TEST(SgaisRun, RejectsMismatchedArityAndBadConfig) {
  const LinRegModel model;
  const Dataset data = linreg_data(10, 1);
  EXPECT_THROW(run_on(GmmModel(), data, EstimatorConfig{}), UsageError);
  EstimatorConfig config;
  config.ess_target = 11.0;
  EXPECT_THROW(run_on(model, data, config), UsageError);
  config = EstimatorConfig{};
  config.particles = 1;
  config.ess_target = 1.0;
  EXPECT_THROW(run_on(model, data, config), UsageError);
}

TEST(EstimatorConfig, EtaScaling) {
  EstimatorConfig config;
  EXPECT_DOUBLE_EQ(config.sghmc_for(1000).eta, 1e-4);
  EXPECT_EQ(config.sghmc_for(1000).alpha, 0.2);
  config.eta = 0.5;
  EXPECT_EQ(config.sghmc_for(1000).eta, 0.5);
}
