#include <benchmark/benchmark.h>

#include <vector>

#include "sgais/models.hpp"
#include "sgais/numeric.hpp"
#include "sgais/rng.hpp"
#include "sgais/sgais.hpp"
#include "sgais/sghmc.hpp"

namespace bm = benchmark;
using namespace sgais;

namespace {

Dataset gmm_data(const models::GmmModel& model, std::size_t n) {
  RngStream truth(1, streams::kTruth);
  RngStream rng(1, streams::kData);
  return models::generate_observations(model, model.sample_prior(truth), n, rng);
}

}  // namespace

static void BM_LogSumExp(bm::State& st) {
  RngStream rng(1, 1);
  std::vector<double> values(static_cast<std::size_t>(st.range(0)));
  for (auto& v : values) v = 50.0 * rng.normal();
  for (auto _ : st) bm::DoNotOptimize(log_sum_exp(values));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

static void BM_GmmSumLogLik(bm::State& st) {
  const models::GmmModel model;
  const Dataset data = gmm_data(model, static_cast<std::size_t>(st.range(0)));
  RngStream rng(2, 1);
  const ParamVector theta = model.sample_prior(rng);
  for (auto _ : st) bm::DoNotOptimize(model.sum_log_lik(theta, data.view()));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

static void BM_GmmGradSumLogLik(bm::State& st) {
  const models::GmmModel model;
  const Dataset data = gmm_data(model, static_cast<std::size_t>(st.range(0)));
  RngStream rng(3, 1);
  const ParamVector theta = model.sample_prior(rng);
  ParamVector grad = ParamVector::Zero(static_cast<Eigen::Index>(model.dim()));
  for (auto _ : st) {
    model.add_grad_sum_log_lik(theta, data.view(), 1.0, grad);
    bm::DoNotOptimize(grad.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

// One SGHMC step with a 500-row chunk term and a 500-row history batch.
static void BM_SghmcStep(bm::State& st) {
  const models::GmmModel model;
  const Dataset data = gmm_data(model, 5000);
  PotentialSpec spec;
  spec.model = &model;
  spec.chunk = data.view().rows(4500, 500);
  spec.lambda = 0.5;
  spec.history = data.view().rows(0, 4500);
  spec.n_prev = 4500;
  spec.batch_size = 500;
  const SghmcParams params{0.1 / 5000, 0.2, 0.0};
  RngStream rng(4, 1);
  SghmcScratch scratch;
  KineticState state{model.sample_prior(rng), ParamVector::Zero(static_cast<Eigen::Index>(model.dim()))};
  const KineticState start = state;
  std::size_t steps = 0;
  for (auto _ : st) {
    if (++steps % 1000 == 0) state = start;
    sghmc_step(state, spec, params, rng, scratch);
    bm::DoNotOptimize(state.position.data());
  }
}

// Anneals one chunk into prior-drawn particles against a 5000-row history.
static void BM_ChunkUpdate(bm::State& st) {
  const models::GmmModel model;
  const Dataset data = gmm_data(model, 5500);
  EstimatorConfig config;
  ChunkContext ctx;
  ctx.model = &model;
  ctx.chunk = data.view().rows(5000, 500);
  ctx.history = data.view().rows(0, 5000);
  ctx.n_prev = 5000;
  ctx.chunk_index = 10;
  ctx.sghmc = config.sghmc_for(5500);
  std::uint64_t seed = 0;
  for (auto _ : st) {
    st.PauseTiming();
    ParticleWorkspace work(++seed, config.particles);
    ParticleEnsemble ensemble = init_ensemble(model, config.particles, work.rngs);
    st.ResumeTiming();
    bm::DoNotOptimize(sgais_chunk_update(ensemble, ctx, config, work).steps);
  }
}

BENCHMARK(BM_LogSumExp)->RangeMultiplier(10)->Range(10, 100000);
BENCHMARK(BM_GmmSumLogLik)->Arg(500)->Arg(5000);
BENCHMARK(BM_GmmGradSumLogLik)->Arg(500)->Arg(5000);
BENCHMARK(BM_SghmcStep)->Unit(bm::kMicrosecond);
BENCHMARK(BM_ChunkUpdate)->Unit(bm::kMillisecond);

BENCHMARK_MAIN();
