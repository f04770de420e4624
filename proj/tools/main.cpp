#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sgais/errors.hpp"
#include "sgais_cli/commands.hpp"

namespace {

using namespace sgais;
using namespace sgais::cli;

constexpr int kExitUsage = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitTimeout = 4;

Settings gather_settings(const std::string& config_path, const std::vector<std::string>& overrides) {
  Settings s = config_path.empty() ? Settings{} : Settings::load(config_path);
  for (const auto& o : overrides) s.set_assignment(o);
  s.check_known();
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evidence estimation with stochastic-gradient annealed importance sampling"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "Settings file (key = value, [section] headers)");
    cmd->add_option("-s,--set", overrides, "Override a setting, e.g. --set sgais.particles=20");
  };

  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  GenerateArgs gen_args;
  gen->add_option("model", gen_args.kind, "linreg | logreg | gmm | gmm:K:D | gaussian-mean | gmm-shift")->required();
  gen->add_option("-n,--size", gen_args.n, "Number of observations")->capture_default_str();
  gen->add_option("--seed", gen_args.seed, "Generator seed")->capture_default_str();
  gen->add_option("-o,--out", gen_args.out, "Output dataset file")->required();
  gen->add_flag("-f,--force", gen_args.force, "Overwrite an existing file");
  gen->add_flag("--text", gen_args.text, "Also write a text export next to the file");

  auto* run = app.add_subcommand("run", "Run one estimator on a dataset");
  RunArgs run_args;
  run->add_option("estimator", run_args.estimator, "sgais | ais | ns")
      ->required()
      ->check(CLI::IsMember({"sgais", "ais", "ns"}));
  run->add_option("dataset", run_args.dataset, "Dataset file")->required();
  run->add_option("-o,--out", run_args.out, "Trace CSV path")->required();
  run->add_option("-m,--model", run_args.model, "Model id (default: dataset header)");
  run->add_option("--seed", seed, "Estimator seed (run.seed)");
  run->add_option("-j,--threads", threads, "Worker threads for particle loops (run.threads)");
  run->add_flag("--stream", run_args.stream, "Read chunks from the file instead of loading it");
  add_common(run);

  auto* shift = app.add_subcommand("shift-demo", "Distribution-shift stream with 3/5/7 components");
  ShiftDemoArgs shift_args;
  shift->add_option("-o,--out-dir", shift_args.out_dir, "Output directory")->required();
  shift->add_option("--scale-down", shift_args.scale_down, "Divide the 1000/9000/90000 phases by this factor")
      ->capture_default_str();
  shift->add_option("--seed", shift_args.seed, "Dataset seed")->capture_default_str();
  add_common(shift);

  auto* bench = app.add_subcommand("bench", "Accuracy and run time versus dataset size");
  BenchArgs bench_args;
  bool full_scale = false;
  bench->add_option("-o,--out-dir", bench_args.out_dir, "Output directory")->required();
  bench->add_option("--models", bench_args.models, "Model ids")->capture_default_str();
  bench->add_option("--grid", bench_args.grid, "Dataset sizes")->capture_default_str();
  bench->add_option("--estimators", bench_args.estimators, "sgais ns ais")->capture_default_str();
  bench->add_option("--seed", bench_args.seed, "Dataset and estimator seed")->capture_default_str();
  bench->add_flag("--full-scale", full_scale, "Use the grid 1e3 .. 1e6");
  add_common(bench);

  auto* sweep = app.add_subcommand("sweep", "One-parameter sensitivity sweep of SGAIS");
  SweepArgs sweep_args;
  sweep->add_option("parameter", sweep_args.parameter, "M | ess_target | burn_in | lr | lr_burnin_product | batch_size")
      ->required();
  sweep->add_option("values", sweep_args.values, "Values to try")->required();
  sweep->add_option("-o,--out-dir", sweep_args.out_dir, "Output directory")->required();
  sweep->add_option("--seeds", sweep_args.seeds, "Estimator seeds per value")->capture_default_str();
  sweep->add_option("--model", sweep_args.model, "Model id")->capture_default_str();
  sweep->add_option("-n,--size", sweep_args.n, "Dataset size")->capture_default_str();
  sweep->add_option("--data-seed", sweep_args.data_seed, "Dataset seed")->capture_default_str();
  add_common(sweep);

  auto* plot = app.add_subcommand("plot", "Render trace CSVs as SVG");
  PlotArgs plot_args;
  plot->add_option("traces", plot_args.traces, "Trace CSV files")->required();
  plot->add_option("-o,--out", plot_args.out, "SVG path")->required();
  plot->add_option("--metric", plot_args.metric, "log_z | log_z_per_n | anneal_steps | cum_wall_time_s")
      ->capture_default_str();
  plot->add_option("--title", plot_args.title, "Chart title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      const Dataset ds = cmd_generate(gen_args);
      std::cout << "wrote " << ds.size() << " observations (" << ds.header().model << ") to "
                << gen_args.out.string() << "\n";
    } else if (run->parsed()) {
      run_args.settings = gather_settings(config_path, overrides);
      if (run->count("--seed") > 0) run_args.settings.set("run.seed", std::to_string(seed));
      if (run->count("--threads") > 0) run_args.settings.set("run.threads", std::to_string(threads));
      const RunOutcome out = cmd_run(run_args);
      std::printf("log Z = %.10g  log Z / N = %.10g  (%.3f s)\n", out.run.log_z,
                  out.run.rows.empty() ? 0.0 : out.run.rows.back().log_z_per_n, out.run.wall_time_s);
    } else if (shift->parsed()) {
      shift_args.settings = gather_settings(config_path, overrides);
      cmd_shift_demo(shift_args, &std::cout);
    } else if (bench->parsed()) {
      bench_args.settings = gather_settings(config_path, overrides);
      if (full_scale) bench_args.grid = {1000, 3000, 10000, 30000, 100000, 300000, 1000000};
      cmd_bench(bench_args, &std::cout);
    } else if (sweep->parsed()) {
      sweep_args.settings = gather_settings(config_path, overrides);
      cmd_sweep(sweep_args, &std::cout);
    } else if (plot->parsed()) {
      cmd_plot(plot_args);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const TimeoutError& e) {
    std::cerr << "timeout: " << e.what() << "\n";
    return kExitTimeout;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
