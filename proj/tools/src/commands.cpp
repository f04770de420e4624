#include "sgais_cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include "sgais/data.hpp"
#include "sgais/errors.hpp"
#include "sgais/execution.hpp"
#include "sgais/models.hpp"
#include "sgais/numeric.hpp"
#include "sgais_cli/svg.hpp"

namespace sgais::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kShiftTotal = 100000;

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Deadline deadline_from(const Settings& s) {
  const double t = run_timeout_seconds(s);
  return t > 0.0 ? Deadline::after(std::chrono::duration<double>(t)) : Deadline::none();
}

std::string file_label(std::string id) {
  std::replace(id.begin(), id.end(), ':', '-');
  return id;
}

Dataset prefix_copy(const Dataset& data, std::size_t n) {
  n = std::min(n, data.size());
  const auto& v = data.values();
  return Dataset(data.header(), std::vector<double>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n * data.arity())));
}

void ensure_dir(const fs::path& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void say(std::ostream* log, const std::string& line) {
  if (log != nullptr) *log << line << std::endl;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

// ---------------------------------------------------------------------------

Dataset make_dataset(std::string_view kind, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw UsageError("dataset size must be positive");
  if (kind == "gmm-shift") {
    if (kShiftTotal % n != 0) throw UsageError("gmm-shift size must divide 100000");
    const std::size_t factor = kShiftTotal / n;
    const data::ShiftLayout layout = factor == 1 ? data::ShiftLayout{} : data::ShiftLayout{}.scaled_down(factor);
    return data::generate_shift_dataset(seed, layout);
  }
  const auto model = models::make_model(kind);
  RngStream truth_rng(seed, streams::kTruth);
  const ParamVector truth = model->sample_prior(truth_rng);
  RngStream data_rng(seed, streams::kData);
  return models::generate_observations(*model, truth, n, data_rng);
}

double exact_log_evidence(const BayesModel& model, const ObsView& data) {
  if (const auto* m = dynamic_cast<const models::LinRegModel*>(&model)) {
    return models::linreg_log_ml_exact(data, m->noise_var());
  }
  if (const auto* m = dynamic_cast<const models::GaussianMeanModel*>(&model)) {
    return models::gaussian_mean_log_ml_exact(data, m->prior_var(), m->noise_var());
  }
  if (const auto* m = dynamic_cast<const models::ConstantLikelihoodModel*>(&model)) {
    return static_cast<double>(data.size()) * m->log_c();
  }
  if (dynamic_cast<const models::FixedDensityModel*>(&model) != nullptr) {
    return model.sum_log_lik(ParamVector::Zero(1), data);
  }
  return kNaN;
}

Dataset cmd_generate(const GenerateArgs& args) {
  if (args.out.empty()) throw UsageError("generate: output path required");
  if (fs::exists(args.out) && !args.force) {
    throw UsageError("generate: '" + args.out.string() + "' exists (use --force to overwrite)");
  }
  Dataset ds = make_dataset(args.kind, args.n, args.seed);
  ensure_dir(args.out.parent_path());
  data::write_dataset(args.out, ds);
  if (args.text) data::write_dataset_text(fs::path(args.out.string() + ".txt"), ds);
  return ds;
}

// ---------------------------------------------------------------------------

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::uint64_t h = fnv1a("");
  std::vector<char> block(1 << 16);
  while (in) {
    in.read(block.data(), static_cast<std::streamsize>(block.size()));
    h = fnv1a(std::string_view(block.data(), static_cast<std::size_t>(in.gcount())), h);
  }
  return hex64(h);
}

RunManifest describe_run(std::string_view estimator, const BayesModel& model,
                         const std::string& dataset_identity, std::size_t observations,
                         const Settings& settings) {
  RunManifest m;
  m.add("estimator", std::string(estimator));
  m.add("model", model.name());
  m.add("dataset", dataset_identity);
  m.add("dataset.n", std::to_string(observations));
  m.add("run.seed", std::to_string(settings.get_u64("run.seed", 0)));
  m.add("run.threads", std::to_string(settings.get_size("run.threads", 1)));
  m.add("run.timeout_s", real(run_timeout_seconds(settings)));
  if (estimator == "sgais") {
    const EstimatorConfig c = estimator_config(settings);
    m.add("sgais.chunk_size", std::to_string(c.chunk_size));
    m.add("sgais.batch_size", std::to_string(c.batch_size));
    m.add("sgais.particles", std::to_string(c.particles));
    m.add("sgais.ess_target", real(c.ess_target));
    m.add("sgais.burn_in", std::to_string(c.burn_in_steps));
    m.add("sgais.lr", real(c.learning_rate));
    m.add("sgais.eta", c.eta ? real(*c.eta) : "derived");
    m.add("sgais.eta_scaling", c.eta_scaling == EtaScaling::kRunning ? "running" : "total");
    m.add("sgais.alpha", real(c.alpha));
    m.add("sgais.beta_hat", real(c.beta_hat));
    m.add("sgais.resample", c.resampling.enabled ? "1" : "0");
    m.add("sgais.resample_threshold", real(c.resampling.threshold));
    m.add("sgais.history", c.history == HistoryMode::kFull ? "full" : "reservoir");
    m.add("sgais.reservoir_capacity", std::to_string(c.reservoir_capacity));
    m.add("sgais.max_anneal_steps", std::to_string(c.max_anneal_steps));
  } else if (estimator == "ais") {
    const AisSettings a = ais_settings(settings, observations);
    m.add("ais.steps", std::to_string(a.steps));
    m.add("ais.shape", real(a.shape));
    m.add("ais.particles", std::to_string(a.options.particles));
    m.add("ais.burn_in", std::to_string(a.options.burn_in_steps));
    m.add("ais.eta", real(a.options.sghmc.eta));
    m.add("ais.alpha", real(a.options.sghmc.alpha));
    m.add("ais.beta_hat", real(a.options.sghmc.beta_hat));
  } else if (estimator == "ns") {
    const baselines::NsOptions o = ns_options(settings);
    m.add("ns.live_points", std::to_string(o.live_points));
    m.add("ns.steps", std::to_string(o.steps_per_replace));
    m.add("ns.eta", real(o.sghmc.eta));
    m.add("ns.alpha", real(o.sghmc.alpha));
    m.add("ns.beta_hat", real(o.sghmc.beta_hat));
    m.add("ns.stop_frac", real(o.stop_frac));
    m.add("ns.max_iterations", std::to_string(o.max_iterations));
  } else {
    throw UsageError("unknown estimator '" + std::string(estimator) + "' (expected sgais, ais or ns)");
  }
  return m;
}

EstimatorRun run_estimator(std::string_view estimator, const BayesModel& model, const Dataset& data,
                           const Settings& settings, std::vector<TraceRow>* partial) {
  if (data.arity() != model.obs_arity()) {
    throw UsageError("dataset arity " + std::to_string(data.arity()) + " does not match model " + model.name());
  }
  EstimatorRun out;
  const Stopwatch clock;
  const std::uint64_t seed = settings.get_u64("run.seed", 0);
  const Deadline deadline = deadline_from(settings);
  if (estimator == "sgais") {
    const EstimatorConfig config = estimator_config(settings);
    auto stream = data::DataStream::from_dataset(data, config.chunk_size);
    RunHooks hooks;
    hooks.deadline = deadline;
    double cum = 0.0;
    hooks.on_chunk = [&](const AnnealRecord& r) {
      cum += r.wall_time;
      out.rows.push_back(make_row(r.n_consumed, r.log_z_after, r.steps, cum, "sgais", seed));
      if (partial != nullptr) partial->push_back(out.rows.back());
    };
    out.log_z = sgais_run(model, stream, config, hooks).log_z;
  } else if (estimator == "ais") {
    AisSettings a = ais_settings(settings, data.size());
    a.options.deadline = deadline;
    const auto res = baselines::ais_run(model, data.view(), baselines::sigmoid_schedule(a.steps, a.shape), a.options);
    out.log_z = res.log_z;
    out.rows.push_back(make_row(data.size(), res.log_z, a.steps, clock.seconds(), "ais", seed));
  } else if (estimator == "ns") {
    baselines::NsOptions o = ns_options(settings);
    o.deadline = deadline;
    auto res = baselines::ns_run(model, data.view(), o);
    out.log_z = res.log_z;
    out.rows.push_back(make_row(data.size(), res.log_z, res.trace.size(), clock.seconds(), "ns", seed));
    out.ns_iterations = std::move(res.trace);
  } else {
    throw UsageError("unknown estimator '" + std::string(estimator) + "' (expected sgais, ais or ns)");
  }
  out.wall_time_s = clock.seconds();
  return out;
}

RunOutcome cmd_run(const RunArgs& args) {
  args.settings.check_known();
  if (args.out.empty()) throw UsageError("run: output path required");
  if (!fs::exists(args.dataset)) throw UsageError("run: dataset '" + args.dataset.string() + "' not found");
  const bool streaming = args.stream || args.settings.get_bool("run.stream", false);
  if (streaming && args.estimator != "sgais") throw UsageError("run: --stream applies to sgais only");

  const auto [header, rows] = data::read_dataset_header(args.dataset);
  const auto model = models::make_model(args.model.empty() ? header.model : args.model);
  const std::string identity = header.model + ":n=" + std::to_string(rows) + ":seed=" +
                               std::to_string(header.seed) + ":" + file_hash(args.dataset);

  RunOutcome outcome;
  outcome.manifest = describe_run(args.estimator, *model, identity, rows, args.settings);
  outcome.manifest.started = utc_timestamp();
  ensure_dir(args.out.parent_path());
  const fs::path manifest_path = manifest_path_for(args.out);
  outcome.manifest.outputs.push_back(args.out.string());

  std::vector<TraceRow> partial;
  const std::uint64_t seed = args.settings.get_u64("run.seed", 0);
  const Stopwatch clock;
  const auto fail = [&](const std::string& status) {
    partial.push_back(make_row(partial.empty() ? 0 : partial.back().n, kNaN, 0, clock.seconds(),
                               args.estimator + "!" + status, seed));
    write_trace(args.out, partial);
    outcome.manifest.finished = utc_timestamp();
    outcome.manifest.write(manifest_path);
  };
  try {
    if (streaming) {
      const EstimatorConfig config = estimator_config(args.settings);
      auto stream = data::DataStream::from_file(args.dataset, config.chunk_size);
      RunHooks hooks;
      hooks.deadline = deadline_from(args.settings);
      double cum = 0.0;
      hooks.on_chunk = [&](const AnnealRecord& r) {
        cum += r.wall_time;
        partial.push_back(make_row(r.n_consumed, r.log_z_after, r.steps, cum, "sgais", seed));
      };
      outcome.run.log_z = sgais_run(*model, stream, config, hooks).log_z;
      outcome.run.rows = partial;
      outcome.run.wall_time_s = clock.seconds();
    } else {
      const Dataset data = data::read_dataset(args.dataset);
      outcome.run = run_estimator(args.estimator, *model, data, args.settings, &partial);
    }
  } catch (const DivergenceError&) {
    fail("diverged");
    throw;
  } catch (const TimeoutError&) {
    fail("timeout");
    throw;
  }
  write_trace(args.out, outcome.run.rows);
  if (args.estimator == "ns") {
    fs::path iter_path = args.out;
    iter_path.replace_extension(".ns.csv");
    std::string text = "k,log_l,log_x,log_z\n";
    for (const auto& it : outcome.run.ns_iterations) {
      text += std::to_string(it.k) + ',' + real(it.log_l) + ',' + real(it.log_x) + ',' + real(it.log_z) + '\n';
    }
    write_text(iter_path, text);
    outcome.manifest.outputs.push_back(iter_path.string());
  }
  outcome.manifest.finished = utc_timestamp();
  outcome.manifest.write(manifest_path);
  return outcome;
}

// ---------------------------------------------------------------------------

ShiftDemoResult cmd_shift_demo(const ShiftDemoArgs& args, std::ostream* log) {
  args.settings.check_known();
  if (args.components.empty()) throw UsageError("shift-demo: no component counts");
  ensure_dir(args.out_dir);
  const data::ShiftLayout layout =
      args.scale_down <= 1 ? data::ShiftLayout{} : data::ShiftLayout{}.scaled_down(args.scale_down);
  const Dataset ordered = data::generate_shift_dataset(args.seed, layout);
  RngStream shuffle_rng(args.seed, streams::kShuffle);
  const Dataset shuffled = data::shuffle_dataset(ordered, shuffle_rng);
  data::write_dataset(args.out_dir / "shift.sgds", ordered);
  data::write_dataset(args.out_dir / "shift_shuffled.sgds", shuffled);

  ShiftDemoResult result;
  result.phase_boundaries = ordered.header().phase_boundaries;
  Chart per_n{"Shift stream: log Z / n", "observations n", "log Z / n", std::nullopt, false, {}};
  Chart steps{"Shift stream: annealing steps per chunk", "observations n", "annealing steps", false, std::nullopt, {}};
  for (std::size_t k : args.components) {
    const models::GmmModel model(k, 2);
    for (bool is_shuffled : {false, true}) {
      const Dataset& ds = is_shuffled ? shuffled : ordered;
      const std::string tag = "k" + std::to_string(k) + (is_shuffled ? "_shuffled" : "_inorder");
      say(log, "shift-demo: running K=" + std::to_string(k) + (is_shuffled ? " shuffled" : " in order"));
      RunManifest manifest = describe_run("sgais", model, dataset_id(ds), ds.size(), args.settings);
      manifest.started = utc_timestamp();
      EstimatorRun run = run_estimator("sgais", model, ds, args.settings);
      const fs::path trace_path = args.out_dir / ("shift_" + tag + ".csv");
      write_trace(trace_path, run.rows);
      manifest.finished = utc_timestamp();
      manifest.outputs.push_back(trace_path.string());
      manifest.write(manifest_path_for(trace_path));
      say(log, "  log Z = " + real(run.log_z) + "  (" + real(run.wall_time_s) + " s)");

      Series s;
      s.label = "K=" + std::to_string(k) + (is_shuffled ? " shuffled" : "");
      Series st = s;
      for (const auto& r : run.rows) {
        s.x.push_back(static_cast<double>(r.n));
        s.y.push_back(r.log_z_per_n);
        st.x.push_back(static_cast<double>(r.n));
        st.y.push_back(static_cast<double>(r.anneal_steps));
      }
      per_n.series.push_back(std::move(s));
      if (!is_shuffled) steps.series.push_back(std::move(st));
      result.runs.push_back({k, is_shuffled, std::move(run.rows), run.log_z});
    }
  }
  write_svg(args.out_dir / "shift_log_z_per_n.svg", per_n);
  write_svg(args.out_dir / "shift_anneal_steps.svg", steps);
  return result;
}

// ---------------------------------------------------------------------------

namespace {

std::string bench_line(const BenchCell& c) {
  const double per_n = c.log_z / static_cast<double>(c.n);
  const double exact_per_n = c.exact_log_z / static_cast<double>(c.n);
  return c.model + ',' + c.estimator + ',' + std::to_string(c.n) + ',' + real(c.log_z) + ',' + real(per_n) + ',' +
         real(exact_per_n) + ',' + real(c.wall_time_s) + ',' + c.status + ',' + std::to_string(c.seed) + '\n';
}

}  // namespace

BenchResult cmd_bench(const BenchArgs& args, std::ostream* log) {
  args.settings.check_known();
  if (args.grid.empty() || args.models.empty() || args.estimators.empty()) {
    throw UsageError("bench: models, grid and estimators must be nonempty");
  }
  for (const auto& e : args.estimators) {
    if (e != "sgais" && e != "ns" && e != "ais") throw UsageError("bench: unknown estimator '" + e + "'");
  }
  ensure_dir(args.out_dir);
  std::vector<std::size_t> grid = args.grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const std::size_t n_max = grid.back();
  std::vector<std::size_t> baseline_sizes = grid;
  if (args.quarter_point && n_max / 4 > 0 &&
      std::find(grid.begin(), grid.end(), n_max / 4) == grid.end()) {
    baseline_sizes.push_back(n_max / 4);
    std::sort(baseline_sizes.begin(), baseline_sizes.end());
  }

  Settings settings = args.settings;
  settings.set("run.seed", std::to_string(args.seed));
  BenchResult result;
  std::string csv(kBenchHeader);
  csv += '\n';
  const fs::path csv_path = args.out_dir / "bench.csv";
  const auto record = [&](BenchCell cell) {
    say(log, "bench: " + cell.model + " " + cell.estimator + " n=" + std::to_string(cell.n) + " log Z=" +
                 real(cell.log_z) + " t=" + real(cell.wall_time_s) + "s " + cell.status);
    csv += bench_line(cell);
    write_text(csv_path, csv);
    result.cells.push_back(std::move(cell));
  };

  for (const auto& id : args.models) {
    const auto model = models::make_model(id);
    const Dataset full = make_dataset(id, n_max, args.seed);
    const std::string label = file_label(id);
    const auto exact_at = [&](std::size_t n) { return exact_log_evidence(*model, full.prefix(n)); };

    if (std::find(args.estimators.begin(), args.estimators.end(), "sgais") != args.estimators.end()) {
      std::vector<TraceRow> rows;
      std::string status = "ok";
      RunManifest manifest = describe_run("sgais", *model, dataset_id(full), full.size(), settings);
      manifest.started = utc_timestamp();
      try {
        run_estimator("sgais", *model, full, settings, &rows);
      } catch (const TimeoutError&) {
        status = "timeout";
      } catch (const DivergenceError&) {
        status = "diverged";
      }
      const fs::path trace_path = args.out_dir / ("bench_" + label + "_sgais.csv");
      write_trace(trace_path, rows);
      manifest.finished = utc_timestamp();
      manifest.outputs.push_back(trace_path.string());
      manifest.write(manifest_path_for(trace_path));
      for (std::size_t n : grid) {
        const auto it = std::find_if(rows.begin(), rows.end(), [&](const TraceRow& r) { return r.n >= n; });
        BenchCell cell{id, "sgais", n, kNaN, exact_at(n), kNaN, status, args.seed};
        if (it != rows.end()) {
          cell.n = it->n;
          cell.log_z = it->log_z;
          cell.wall_time_s = it->cum_wall_time_s;
          cell.status = "ok";
          cell.exact_log_z = exact_at(it->n);
        }
        record(cell);
      }
      result.sgais_traces[id] = std::move(rows);
    }

    for (const std::string est : {"ns", "ais"}) {
      if (std::find(args.estimators.begin(), args.estimators.end(), est) == args.estimators.end()) continue;
      for (std::size_t n : baseline_sizes) {
        const Dataset part = prefix_copy(full, n);
        BenchCell cell{id, est, n, kNaN, exact_at(n), kNaN, "ok", args.seed};
        const Stopwatch clock;
        try {
          const EstimatorRun run = run_estimator(est, *model, part, settings);
          cell.log_z = run.log_z;
          cell.wall_time_s = run.wall_time_s;
        } catch (const TimeoutError&) {
          cell.status = "timeout";
          cell.wall_time_s = clock.seconds();
        } catch (const DivergenceError&) {
          cell.status = "diverged";
          cell.wall_time_s = clock.seconds();
        }
        record(cell);
      }
    }

    Chart accuracy{"log Z / N vs N (" + id + ")", "N", "log Z / N", std::nullopt, false, {}};
    Chart timing{"Wall time vs N (" + id + ")", "N", "seconds", std::nullopt, true, {}};
    for (const std::string est : {"sgais", "ns", "ais"}) {
      Series a{est, {}, {}, {}, {}};
      Series t{est, {}, {}, {}, {}};
      for (const auto& c : result.cells) {
        if (c.model != id || c.estimator != est || c.status != "ok") continue;
        a.x.push_back(static_cast<double>(c.n));
        a.y.push_back(c.log_z / static_cast<double>(c.n));
        t.x.push_back(static_cast<double>(c.n));
        t.y.push_back(c.wall_time_s);
      }
      if (!a.x.empty()) {
        accuracy.series.push_back(std::move(a));
        timing.series.push_back(std::move(t));
      }
    }
    Series exact{"exact", {}, {}, {}, {}};
    for (std::size_t n : grid) {
      const double e = exact_at(n);
      if (std::isfinite(e)) {
        exact.x.push_back(static_cast<double>(n));
        exact.y.push_back(e / static_cast<double>(n));
      }
    }
    if (!exact.x.empty()) accuracy.series.push_back(std::move(exact));
    if (!accuracy.series.empty()) {
      write_svg(args.out_dir / ("bench_" + label + "_log_z_per_n.svg"), accuracy);
      write_svg(args.out_dir / ("bench_" + label + "_time.svg"), timing);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

Settings sweep_settings(const Settings& base, std::string_view parameter, double value) {
  Settings s = base;
  const auto integral = [&](const char* what) {
    if (!(value >= 1.0) || value != std::floor(value)) {
      throw UsageError(std::string("sweep: ") + what + " values must be positive integers");
    }
    return std::to_string(static_cast<std::size_t>(value));
  };
  if (parameter == "M") {
    s.set("sgais.particles", integral("M"));
    // Keep the reference ESS-to-particle ratio unless the target is pinned.
    if (!base.contains("sgais.ess_target")) s.set("sgais.ess_target", real(std::max(1.0, value / 2.0)));
  } else if (parameter == "ess_target") {
    s.set("sgais.ess_target", real(value));
  } else if (parameter == "burn_in") {
    s.set("sgais.burn_in", integral("burn_in"));
  } else if (parameter == "lr") {
    s.set("sgais.lr", real(value));
  } else if (parameter == "lr_burnin_product") {
    if (!(value > 0.0)) throw UsageError("sweep: learning rates must be positive");
    const EstimatorConfig ref = estimator_config(base);
    const double product = ref.learning_rate * static_cast<double>(ref.burn_in_steps);
    const auto burn_in = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(product / value)));
    s.set("sgais.lr", real(value));
    s.set("sgais.burn_in", std::to_string(burn_in));
  } else if (parameter == "batch_size") {
    s.set("sgais.batch_size", integral("batch_size"));
  } else {
    throw UsageError("sweep: unknown parameter '" + std::string(parameter) +
                     "' (expected M, ess_target, burn_in, lr, lr_burnin_product, batch_size)");
  }
  return s;
}

std::vector<SweepPoint> cmd_sweep(const SweepArgs& args, std::ostream* log) {
  args.settings.check_known();
  if (args.values.empty()) throw UsageError("sweep: no values");
  if (args.seeds == 0) throw UsageError("sweep: seeds must be positive");
  ensure_dir(args.out_dir);
  const auto model = models::make_model(args.model);
  const Dataset ds = make_dataset(args.model, args.n, args.data_seed);
  std::vector<SweepPoint> points;
  std::string csv(kSweepHeader);
  csv += '\n';
  const fs::path csv_path = args.out_dir / ("sweep_" + args.parameter + ".csv");
  for (double value : args.values) {
    Settings s = sweep_settings(args.settings, args.parameter, value);
    for (std::uint64_t seed = 0; seed < args.seeds; ++seed) {
      s.set("run.seed", std::to_string(seed));
      SweepPoint p;
      p.value = value;
      p.seed = seed;
      p.status = "ok";
      try {
        const EstimatorRun run = run_estimator("sgais", *model, ds, s);
        p.log_z = run.log_z;
        p.log_z_per_n = run.log_z / static_cast<double>(ds.size());
        p.wall_time_s = run.wall_time_s;
        p.min_chunk_steps = std::numeric_limits<std::uint64_t>::max();
        for (const auto& r : run.rows) {
          p.anneal_steps += r.anneal_steps;
          p.max_chunk_steps = std::max(p.max_chunk_steps, r.anneal_steps);
          p.min_chunk_steps = std::min(p.min_chunk_steps, r.anneal_steps);
        }
      } catch (const TimeoutError&) {
        p.status = "timeout";
      } catch (const DivergenceError&) {
        p.status = "diverged";
      } catch (const Error& e) {
        p.status = "error";
        say(log, std::string("sweep: ") + e.what());
      }
      if (p.status != "ok") p.log_z = p.log_z_per_n = p.wall_time_s = kNaN;
      say(log, "sweep: " + args.parameter + "=" + real(value) + " seed " + std::to_string(seed) +
                   " log Z/N=" + real(p.log_z_per_n) + " t=" + real(p.wall_time_s) + "s " + p.status);
      csv += args.parameter + ',' + real(p.value) + ',' + std::to_string(p.seed) + ',' + real(p.log_z) + ',' +
             real(p.log_z_per_n) + ',' + real(p.wall_time_s) + ',' + std::to_string(p.anneal_steps) + ',' +
             std::to_string(p.min_chunk_steps) + ',' + std::to_string(p.max_chunk_steps) + ',' + p.status + '\n';
      write_text(csv_path, csv);
      points.push_back(p);
    }
  }

  const auto chart_of = [&](const std::string& title, const std::string& y_label, auto metric) {
    Chart c{title, args.parameter, y_label, false, std::nullopt, {}};
    Series s{args.parameter, {}, {}, {}, {}};
    for (double value : args.values) {
      std::vector<double> ys;
      for (const auto& p : points) {
        if (p.value == value && p.status == "ok") ys.push_back(metric(p));
      }
      if (ys.empty()) continue;
      s.x.push_back(value);
      s.y.push_back(median(ys));
      s.lo.push_back(*std::min_element(ys.begin(), ys.end()));
      s.hi.push_back(*std::max_element(ys.begin(), ys.end()));
    }
    c.series.push_back(std::move(s));
    return c;
  };
  const std::string stem = "sweep_" + args.parameter;
  try {
    write_svg(args.out_dir / (stem + "_log_z_per_n.svg"),
              chart_of("log Z / N vs " + args.parameter, "log Z / N", [](const SweepPoint& p) { return p.log_z_per_n; }));
    write_svg(args.out_dir / (stem + "_time.svg"),
              chart_of("Run time vs " + args.parameter, "seconds", [](const SweepPoint& p) { return p.wall_time_s; }));
    write_svg(args.out_dir / (stem + "_anneal_steps.svg"),
              chart_of("Annealing steps vs " + args.parameter, "total annealing steps",
                       [](const SweepPoint& p) { return static_cast<double>(p.anneal_steps); }));
  } catch (const UsageError&) {
    say(log, "sweep: no successful runs to plot");
  }
  return points;
}

// ---------------------------------------------------------------------------

void cmd_plot(const PlotArgs& args) {
  if (args.traces.empty()) throw UsageError("plot: no trace files");
  if (args.out.empty()) throw UsageError("plot: output path required");
  double (*metric)(const TraceRow&) = nullptr;
  if (args.metric == "log_z") {
    metric = [](const TraceRow& r) { return r.log_z; };
  } else if (args.metric == "log_z_per_n") {
    metric = [](const TraceRow& r) { return r.log_z_per_n; };
  } else if (args.metric == "anneal_steps") {
    metric = [](const TraceRow& r) { return static_cast<double>(r.anneal_steps); };
  } else if (args.metric == "cum_wall_time_s") {
    metric = [](const TraceRow& r) { return r.cum_wall_time_s; };
  } else {
    throw UsageError("plot: unknown metric '" + args.metric + "'");
  }

  Chart chart{args.title.empty() ? args.metric + " vs n" : args.title, "n", args.metric, std::nullopt,
              std::nullopt, {}};
  for (const auto& path : args.traces) {
    const auto rows = read_trace(path);
    if (rows.empty()) throw UsageError("plot: trace '" + path.string() + "' is empty");
    std::vector<std::string> estimators;
    for (const auto& r : rows) {
      if (std::find(estimators.begin(), estimators.end(), r.estimator) == estimators.end()) {
        estimators.push_back(r.estimator);
      }
    }
    for (const auto& est : estimators) {
      std::map<std::uint64_t, std::vector<double>> by_n;
      std::vector<std::uint64_t> seeds;
      for (const auto& r : rows) {
        if (r.estimator != est) continue;
        by_n[r.n].push_back(metric(r));
        if (std::find(seeds.begin(), seeds.end(), r.seed) == seeds.end()) seeds.push_back(r.seed);
      }
      Series s;
      s.label = args.traces.size() > 1 ? path.stem().string() + ":" + est : est;
      const bool band = seeds.size() > 1;
      for (const auto& [n, ys] : by_n) {
        s.x.push_back(static_cast<double>(n));
        s.y.push_back(median(ys));
        if (band) {
          s.lo.push_back(*std::min_element(ys.begin(), ys.end()));
          s.hi.push_back(*std::max_element(ys.begin(), ys.end()));
        }
      }
      chart.series.push_back(std::move(s));
    }
  }
  write_svg(args.out, chart);
}

}  // namespace sgais::cli
