#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sgais/execution.hpp"
#include "sgais/model.hpp"
#include "sgais/sghmc.hpp"

namespace sgais::baselines {

/// Rescaled sigmoid schedule lambda_t = (s(d(2t/T - 1)) - s(-d)) / (s(d) - s(-d)).
struct AisSchedule {
  std::size_t steps = 0;       // T
  double shape = 0.0;          // delta
  std::vector<double> lambdas; // T + 1 entries, lambdas[0] = 0, lambdas[T] = 1
};

/// Throws UsageError unless T >= 2 and delta > 0.
AisSchedule sigmoid_schedule(std::size_t steps, double shape);

/// Step size across the schedule: the fixed sghmc.eta, or sghmc.eta / max(lambda_t, 1/N)
/// so that the step tracks the width of the tempered posterior.
enum class AisStepScaling { kFixed, kTempered };

struct AisOptions {
  std::size_t particles = 10;
  SghmcParams sghmc;  // eta is the step at lambda = 1
  AisStepScaling step_scaling = AisStepScaling::kTempered;
  std::size_t burn_in_steps = 20;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  Deadline deadline;
};

struct AisResult {
  double log_z = 0.0;
  std::vector<double> log_weights;
};

/// Annealed importance sampling over the full dataset with full-data SGHMC moves.
AisResult ais_run(const BayesModel& model, const ObsView& data, const AisSchedule& schedule,
                  const AisOptions& options);

/// Specular reflection of `v` off the plane normal to `grad_loglik`:
/// v - 2 (v.n) n with n = grad / |grad|. Throws UsageError for a zero gradient.
ParamVector galilean_reflect(const ParamVector& v, const ParamVector& grad_loglik);

/// A point inside the current likelihood contour, with its cached full-data log L.
struct LivePoint {
  KineticState state;
  double log_l = 0.0;
};

/// Counts full-data likelihood and gradient evaluations.
struct NsCounters {
  std::size_t likelihood_evals = 0;
  std::size_t gradient_evals = 0;
  std::size_t reflections = 0;
  std::size_t momentum_resamples = 0;
};

/// One prior-targeting SGHMC step constrained to log L > threshold.
///
/// A proposal that leaves the contour is rejected, the momentum is reflected off the
/// contour using grad log L at the violating point, and the move is retried once;
/// if that also fails the momentum is redrawn from N(0, eta I) and the position
/// stays. Throws UsageError if the starting point is below the threshold.
LivePoint ns_constrained_step(const LivePoint& point, const BayesModel& model,
                              const ObsView& data, double threshold, const SghmcParams& params,
                              RngStream& rng, NsCounters* counters = nullptr);
/// Convenience overload that evaluates log L of the start itself.
KineticState ns_constrained_step(const KineticState& state, const BayesModel& model,
                                 const ObsView& data, double threshold,
                                 const SghmcParams& params, RngStream& rng);

struct NsOptions {
  std::size_t live_points = 2;
  std::size_t steps_per_replace = 20;
  SghmcParams sghmc{1e-3, 0.1, 0.0};
  double stop_frac = 0.01;
  std::uint64_t seed = 0;
  std::size_t max_iterations = 1000000;
  Deadline deadline;
};

struct NsIteration {
  std::size_t k = 0;       // replacements so far
  double log_l = 0.0;      // discarded threshold
  double log_x = 0.0;      // -k / K
  double log_z = 0.0;      // accumulated evidence after this iteration
};

struct NsResult {
  double log_z = 0.0;
  std::vector<NsIteration> trace;
  NsCounters counters;
  bool degenerate = false;  // stopped because all live likelihoods were equal
};

/// Nested sampling with deterministic shrinkage X_k = exp(-k/K).
NsResult ns_run(const BayesModel& model, const ObsView& data, const NsOptions& options);

}  // namespace sgais::baselines
