// Command-line driver: synthetic data generation, single runs, replication
// sweeps and the numeric verification of the agent characterizations.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cbeal/datagen.hpp"
#include "cbeal/harness.hpp"
#include "cbeal/theory.hpp"

namespace fs = std::filesystem;
using namespace cbeal;

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  // "a..b" is an inclusive range, otherwise a comma list.
  if (auto dots = spec.find(".."); dots != std::string::npos) {
    const auto a = std::stoull(spec.substr(0, dots));
    const auto b = std::stoull(spec.substr(dots + 2));
    for (auto s = a; s <= b; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream in(spec);
  std::string tok;
  while (std::getline(in, tok, ',')) seeds.push_back(std::stoull(tok));
  return seeds;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(tok);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual-bandit ensemble active learning for data streams"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Write a synthetic labeled stream as CSV");
  std::string gen_config;
  GeneratorConfig g;
  std::string gen_out, gen_test_out;
  gen->add_option("--config", gen_config, "Experiment config to take generator keys from");
  gen->add_option("--n", g.n, "Training rows");
  gen->add_option("--p", g.p, "Feature dimension");
  gen->add_option("--pc", g.pc, "Positive-class fraction");
  gen->add_option("--ds", g.ds, "Label-flip fraction");
  gen->add_option("--sp", g.sp, "Noise-feature fraction");
  gen->add_option("--class-sep", g.class_sep, "Hypercube half-side");
  gen->add_option("--seed", g.seed, "Generator seed");
  gen->add_option("--out", gen_out, "Training stream CSV")->required();
  gen->add_option("--test-out", gen_test_out, "Balanced holdout CSV");

  // run
  auto* run = app.add_subcommand("run", "Run one experiment");
  std::string run_config, run_out;
  std::uint64_t run_seed = 1;
  run->add_option("--config", run_config, "Config file (key=value)")->required();
  run->add_option("--seed", run_seed, "Run seed");
  run->add_option("--out", run_out, "Output directory")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "Replication sweep over seeds");
  std::string bench_config, bench_seeds = "1..10", bench_out, bench_strategies;
  bench->add_option("--config", bench_config, "Config file (key=value)")->required();
  bench->add_option("--seeds", bench_seeds, "Seeds: a..b or a,b,c");
  bench->add_option("--strategies", bench_strategies, "Comma list overriding the config strategy");
  bench->add_option("--out", bench_out, "Output directory")->required();

  // verify-theory
  auto* verify = app.add_subcommand("verify-theory", "Closed-form vs Monte Carlo LD acquisition");
  theory::TheoryParams tp;
  std::string grid_spec = "0,4,8,12,16,20,24,28", verify_out;
  double slack = 0.05;
  verify->add_option("--grid", grid_spec, "Comma list of squared center distances");
  verify->add_option("--q", tp.q, "Dimension");
  verify->add_option("--window", tp.window, "Window size L");
  verify->add_option("--sparsity", tp.sparsity, "Sparsity fraction delta_L");
  verify->add_option("--var-window", tp.var_window, "Window variance");
  verify->add_option("--var-incoming", tp.var_incoming, "Incoming variance");
  verify->add_option("--draws", tp.draws, "Monte Carlo draws per grid point");
  verify->add_option("--seed", tp.seed, "Monte Carlo seed");
  verify->add_option("--slack", slack, "Additive tolerance on top of 3 SE");
  verify->add_option("--out", verify_out, "Grid CSV path (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      if (!gen_config.empty()) {
        const auto seed = g.seed;
        g = load_config(gen_config).generator;
        g.seed = seed;
      }
      const Dataset data = generate(g);
      write_dataset_csv(data, gen_out);
      if (!gen_test_out.empty()) {
        Dataset test;
        test.dimension = data.dimension;
        test.samples = data.holdout;
        write_dataset_csv(test, gen_test_out);
      }
      std::cout << "wrote " << data.samples.size() << " rows to " << gen_out << "\n";
    } else if (*run) {
      const ExperimentConfig config = load_config(run_config);
      const RunMetrics m = run_experiment(config, run_seed);
      export_results(m, run_out);
      std::cout << config.strategy << " seed " << run_seed << ": accuracy "
                << format_double(m.summary.final_accuracy) << " (initial "
                << format_double(m.summary.initial_accuracy) << "), acquired " << m.summary.acquired
                << "\n";
    } else if (*bench) {
      const ExperimentConfig base = load_config(bench_config);
      std::vector<ExperimentConfig> configs;
      for (const auto& s : bench_strategies.empty() ? std::vector<std::string>{base.strategy}
                                                    : split_list(bench_strategies)) {
        ExperimentConfig c = base;
        c.strategy = s;
        c.validate();
        configs.push_back(c);
      }
      const auto seeds = parse_seeds(bench_seeds);
      std::vector<std::vector<RunMetrics>> runs;
      const auto rows = run_replications(configs, seeds, &runs);
      for (std::size_t c = 0; c < configs.size(); ++c)
        for (const auto& m : runs[c])
          export_results(m, fs::path(bench_out) / configs[c].strategy / ("seed_" + std::to_string(m.summary.seed)));
      write_summary_csv(rows, fs::path(bench_out) / "summary.csv");
      for (const auto& r : rows)
        std::cout << r.strategy << ": accuracy " << format_double(r.final_accuracy.mean) << " ("
                  << format_double(r.final_accuracy.se) << "), acquired "
                  << format_double(r.acquired.mean) << "\n";
    } else if (*verify) {
      std::vector<double> grid;
      for (const auto& s : split_list(grid_spec)) grid.push_back(std::stod(s));
      const auto rows = theory::verify_grid(tp, grid, slack);
      std::ostringstream csv;
      csv << "center_dist_sq,closed_form,mc_mean,mc_se,within_tol\n";
      for (const auto& r : rows)
        csv << format_double(r.center_dist_sq) << ',' << format_double(r.closed_form) << ','
            << format_double(r.mc_mean) << ',' << format_double(r.mc_se) << ','
            << (r.within_tol ? 1 : 0) << '\n';
      if (verify_out.empty()) std::cout << csv.str();
      else write_text(verify_out, csv.str());

      tp.center_dist_sq = 0.0;
      const auto th = theory::solve_m2(tp);
      tp.center_dist_sq = th.m2;
      std::cerr << "M1 " << format_double(th.m1) << "  M2 " << format_double(th.m2)
                << "  E[p] at M2 " << format_double(theory::expected_ld_acquisition(tp)) << "\n";
      bool ok = true;
      for (const auto& r : rows) ok = ok && r.within_tol;
      return ok ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
