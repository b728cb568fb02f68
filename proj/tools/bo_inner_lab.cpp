#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "bolab/analysis_stats.hpp"
#include "bolab/errors.hpp"
#include "bolab/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw bolab::Error("cannot write '" + path + "'");
  out << text;
  if (!out.flush()) throw bolab::Error("write failed for '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace bolab;
  CLI::App app{"Bayesian optimization inner-solver laboratory"};
  app.require_subcommand(1);

  std::string benchmark, out_path, config_path, designs_path, store_path, regret_path;
  int n = 3, experiments = 1, workers = 1;
  std::uint64_t seed = 0, gkls_seed = 12;
  std::optional<std::uint64_t> master_seed;
  std::optional<int> runs_per_experiment, n_experiments, max_iter;
  std::optional<double> time_limit;
  std::optional<long> node_cap;

  auto* gen = app.add_subcommand("gen-designs", "Write Latin hypercube initial designs");
  gen->add_option("--benchmark", benchmark, "Benchmark id")->required();
  gen->add_option("--n", n, "Points per design")->check(CLI::PositiveNumber);
  gen->add_option("--experiments", experiments, "Number of designs")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "Master seed");
  gen->add_option("--gkls-seed", gkls_seed, "Seed of the generated GKLS instance");
  gen->add_option("--out", out_path, "Design file")->required();

  auto* run = app.add_subcommand("run", "Execute a case study into a run store");
  run->add_option("--config", config_path, "Case study config")->required();
  run->add_option("--designs", designs_path, "Design file")->required();
  run->add_option("--out", store_path, "Run store (appended, resumable)")->required();
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--master-seed", master_seed, "Override case.master_seed");
  run->add_option("--n-experiments", n_experiments, "Override case.n_experiments");
  run->add_option("--runs-per-experiment", runs_per_experiment, "Override case.runs_per_experiment");
  run->add_option("--max-iter", max_iter, "Override tc.max_iter");
  run->add_option("--time-limit", time_limit, "Override BNB.time_limit");
  run->add_option("--node-cap", node_cap, "Override BNB.node_cap");

  auto* analyze = app.add_subcommand("analyze", "Summarize a run store");
  analyze->add_option("--store", store_path, "Run store")->required();
  analyze->add_option("--out", out_path, "Report file")->required();
  analyze->add_option("--regret-csv", regret_path, "Optional simple-regret CSV");
  analyze->add_option("--seed", seed, "Seed for the approximate max-min search");

  auto* regret = app.add_subcommand("regret", "Export simple-regret curves as CSV");
  regret->add_option("--store", store_path, "Run store")->required();
  regret->add_option("--out", out_path, "CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      bench::BenchmarkOptions opt;
      opt.gkls_seed = gkls_seed;
      const auto ids = bench::benchmark_ids();
      if (std::find(ids.begin(), ids.end(), benchmark) == ids.end())
        throw ConfigError("benchmark", "unknown benchmark '" + benchmark + "'");
      harness::write_designs(out_path, harness::gen_designs(bench::make_benchmark(benchmark, opt), n, experiments, seed));
    } else if (*run) {
      harness::CaseStudyConfig cfg = harness::load_config(config_path);
      if (master_seed) cfg.master_seed = *master_seed;
      if (n_experiments) cfg.n_experiments = *n_experiments;
      if (runs_per_experiment) cfg.runs_per_experiment = *runs_per_experiment;
      if (max_iter) cfg.tc.max_iter = *max_iter;
      if (time_limit) cfg.bnb.time_limit_s = *time_limit;
      if (node_cap) cfg.bnb.node_cap = *node_cap;
      cfg.validate();
      const harness::RunSummary s = harness::run_case_study(cfg, harness::read_designs(designs_path), store_path, workers);
      std::cerr << "executed " << s.executed << ", replicated " << s.replicated << ", skipped " << s.skipped << "\n";
    } else if (*analyze) {
      const auto records = harness::read_store(store_path);
      write_text(out_path, harness::report_text(harness::analyze(records, {seed})));
      if (!regret_path.empty())
        write_text(regret_path, stats::regret_csv(stats::regret_curves(records, records.empty() ? 0.0 : records.front().f_star)));
    } else if (*regret) {
      const auto records = harness::read_store(store_path);
      write_text(out_path, stats::regret_csv(stats::regret_curves(records, records.empty() ? 0.0 : records.front().f_star)));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
