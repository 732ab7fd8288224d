// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
// Usage: cbeal_acceptance [--only N]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "cbeal/harness.hpp"
#include "cbeal/theory.hpp"

using namespace cbeal;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<std::uint64_t> seeds_1_to_10() {
  std::vector<std::uint64_t> s;
  for (std::uint64_t i = 1; i <= 10; ++i) s.push_back(i);
  return s;
}

ExperimentConfig scenario(const std::string& strategy, std::size_t n, std::size_t p, double sp) {
  ExperimentConfig c;
  c.strategy = strategy;
  c.generator.n = n;
  c.generator.p = p;
  c.generator.pc = 0.1;
  c.generator.ds = 0.0;
  c.generator.sp = sp;
  return c;
}

Outcome toy_reproduction() {
  const auto t0 = Clock::now();
  const auto rows = run_replications({scenario("cbeal-2", 500, 2, 0.0), scenario("ral1", 500, 2, 0.0)},
                                     seeds_1_to_10());
  const double secs = seconds_since(t0);
  const double cb = rows[0].final_accuracy.mean, ral = rows[1].final_accuracy.mean;
  const bool ok = cb - ral >= 0.03 && cb >= 0.80 && cb <= 0.95 && secs <= 120.0;
  return {ok, fmt("cbeal-2 %.4f (se %.4f), ral %.4f (se %.4f), gap %+.4f (need >= 0.03), %.1fs", cb,
                  rows[0].final_accuracy.se, ral, rows[1].final_accuracy.se, cb - ral, secs)};
}

Outcome grid_ordering() {
  const auto t0 = Clock::now();
  const auto rows = run_replications({scenario("cbeal-6", 1000, 15, 0.3), scenario("rs", 1000, 15, 0.3)},
                                     seeds_1_to_10());
  const double secs = seconds_since(t0);
  const double cb = rows[0].final_accuracy.mean, rs = rows[1].final_accuracy.mean;
  const double init = rows[0].initial_accuracy.mean;
  const bool ok = cb - rs >= 0.08 && cb - init >= 0.10 && secs <= 600.0;
  return {ok, fmt("cbeal-6 %.4f, rs %.4f (gap %+.4f, need >= 0.08), initial %.4f (gain %+.4f, need >= 0.10), "
                  "%.1fs",
                  cb, rs, cb - rs, init, cb - init, secs)};
}

Outcome theory_check() {
  const auto t0 = Clock::now();
  theory::TheoryParams p;
  p.q = 15;
  p.window = 20;
  p.sparsity = 0.05;
  p.draws = 10000;
  const auto rows = theory::verify_grid(p, {0, 4, 8, 12, 16, 20, 24, 28});
  bool agree = true, monotone = true;
  double worst = -INFINITY;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    agree = agree && rows[i].within_tol;
    worst = std::max(worst, std::abs(rows[i].closed_form - rows[i].mc_mean) - 3.0 * rows[i].mc_se - 0.05);
    if (i > 0) monotone = monotone && rows[i].closed_form >= rows[i - 1].closed_form;
  }
  const auto th = theory::solve_m2(p);
  p.center_dist_sq = th.m2;
  const double at_m2 = std::isfinite(th.m2) ? theory::expected_ld_acquisition(p) : 0.0;
  const double secs = seconds_since(t0);
  const bool ok = agree && monotone && std::isfinite(th.m2) && at_m2 >= 0.9 && secs <= 60.0;
  return {ok, fmt("grid agreement %s (largest |diff| minus tolerance %.4f), monotone %s, M2 %.4f, "
                  "E[p] at M2 %.4f, %.1fs",
                  agree ? "yes" : "no", worst, monotone ? "yes" : "no", th.m2, at_m2, secs)};
}

Outcome exchangeability() {
  theory::TheoryParams p;
  p.q = 5;
  p.window = 20;
  p.draws = 10000;
  p.seed = 31;
  const auto mc = theory::mc_ld_acquisition(p);
  const bool ok = std::abs(mc.lsf_mean - 1.0) <= 3.0 * mc.lsf_se;
  return {ok, fmt("E[lsf] %.4f, se %.4f", mc.lsf_mean, mc.lsf_se)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome invariants() {
  std::vector<std::string> failed;

  // Decision probabilities and weight positivity over random steps.
  {
    bool p_ok = true, w_ok = true;
    for (std::size_t n : {2u, 6u}) {
      SolverConfig cfg;
      cfg.experts = n;
      Exp4pEwmaSolver s(cfg);
      Rng rng(100 + n);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::uniform_int_distribution<int> pick(0, 2);
      const double rewards[] = {0.0, 0.5, 1.0};
      for (std::size_t t = 1; t <= 10000; ++t) {
        std::vector<DecisionVector> xi;
        for (std::size_t i = 0; i < n; ++i) {
          const double v = u(rng);
          xi.push_back(DecisionVector::acquire_with(v < 0.2 ? 0.0 : (v > 0.8 ? 1.0 : v)));
        }
        const auto j = s.decide(xi, rng);
        const double pm = s.p_min();
        p_ok = p_ok && std::abs(j[0] + j[1] - 1.0) <= 1e-9 && j[0] >= pm - 1e-15 && j[1] >= pm - 1e-15 &&
               j[0] <= 1.0 - pm + 1e-15 && j[1] <= 1.0 - pm + 1e-15;
        s.update_weights(xi, j, j.action == Action::kAcquire ? rewards[pick(rng)] : 0.0);
        s.ewma_step(t);
        for (const auto& e : s.experts()) w_ok = w_ok && e.weight > 0.0 && std::isfinite(e.weight);
      }
    }
    if (!p_ok) failed.push_back("P_t bounds");
    if (!w_ok) failed.push_back("weight positivity");
  }

  // Reflection keeps the standardized sum at one.
  {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> w(2 + trial % 6);
      double sum = 0.0;
      for (double& v : w) sum += (v = u(rng) * (trial % 3 == 0 ? 10.0 : 1.0));
      for (double& v : w) v /= sum;
      double out = 0.0;
      for (double v : reflect_weights(w)) out += v;
      ok = ok && std::abs(out - 1.0) <= 1e-12;
    }
    if (!ok) failed.push_back("reflection sum");
  }

  // RAL threshold bounds under arbitrary reward sequences.
  {
    std::mt19937_64 rng(9);
    std::bernoulli_distribution coin(0.5);
    std::uniform_real_distribution<double> eta(0.0, 2.0);
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
      RalAgentState s;
      s.learning_rate = eta(rng);
      for (int i = 0; i < 1000; ++i) {
        ral_update(s, coin(rng) ? s.rewards.reward : s.rewards.signed_penalty());
        ok = ok && s.threshold >= RalAgentState::kMinThreshold && s.threshold <= 1.0;
      }
    }
    if (!ok) failed.push_back("RAL threshold bounds");
  }

  // Budget in every run, and byte-identical exports.
  {
    bool budget_ok = true;
    for (const char* strategy : {"cbeal-2", "cbeal-6", "ral1", "ld1", "spf1", "us", "rs"}) {
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto c = scenario(strategy, 500, 2, 0.0);
        const auto m = run_experiment(c, seed);
        for (const auto& r : m.steps) budget_ok = budget_ok && r.budget_used <= 48;
        budget_ok = budget_ok && m.summary.acquired <= 48;
      }
    }
    if (!budget_ok) failed.push_back("budget");

    auto c = scenario("cbeal-6", 500, 2, 0.0);
    c.timing = false;
    const fs::path a = fs::temp_directory_path() / "cbeal_accept_a";
    const fs::path b = fs::temp_directory_path() / "cbeal_accept_b";
    export_results(run_experiment(c, 17), a);
    export_results(run_experiment(c, 17), b);
    bool same = true;
    for (const char* f : {"metrics.csv", "trajectory.csv", "summary.json"}) same = same && slurp(a / f) == slurp(b / f);
    fs::remove_all(a);
    fs::remove_all(b);
    if (!same) failed.push_back("byte identity");
  }

  std::string detail = "P_t bounds, weight positivity, reflection sum, budget, RAL threshold, byte identity";
  if (!failed.empty()) {
    detail = "failed:";
    for (const auto& f : failed) detail += " " + f + ";";
  }
  return {failed.empty(), detail};
}

Outcome gradient_check() {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> pd(1, 5), nd(2, 50);
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t p = static_cast<std::size_t>(pd(rng)), n = static_cast<std::size_t>(nd(rng));
    LabeledPool pool;
    for (std::size_t i = 0; i < n; ++i) {
      Features x(p);
      for (double& v : x) v = g(rng);
      pool.add(x, coin(rng) ? Label::kPositive : Label::kNegative);
    }
    const Regularization reg{inst % 3 == 0 ? Penalty::kNone : (inst % 3 == 1 ? Penalty::kL2 : Penalty::kL1), 0.2};
    Features w(p);
    for (double& v : w) {
      v = g(rng);
      if (std::abs(v) < 0.01) v = 0.01;
    }
    const double b = g(rng);
    const auto lg = logistic_loss(pool, w, b, reg);
    const double h = 1e-6;
    for (std::size_t k = 0; k <= p; ++k) {
      Features wp = w, wm = w;
      double bp = b, bm = b;
      if (k < p) {
        wp[k] += h;
        wm[k] -= h;
      } else {
        bp += h;
        bm -= h;
      }
      const double fd = (logistic_loss(pool, wp, bp, reg).loss - logistic_loss(pool, wm, bm, reg).loss) / (2 * h);
      worst = std::max(worst, std::abs(fd - lg.gradient[k]) / std::max(1.0, std::abs(fd)));
    }
  }
  return {worst < 1e-5, fmt("worst relative error %.3g over 20 instances", worst)};
}

// Favored expert votes acquire, the rest vote pass; the first 100 steps are
// forced acquisitions with reward 1.
struct FlipRun {
  std::size_t first_flip = 0;
  bool monotone = true;
};

FlipRun crafted_stream(bool monitoring) {
  SolverConfig cfg;
  cfg.experts = 6;
  cfg.monitoring = monitoring;
  Exp4pEwmaSolver s(cfg);
  Rng rng(77);
  std::vector<DecisionVector> xi(6, DecisionVector::acquire_with(0.0));
  xi[0] = DecisionVector::acquire_with(1.0);
  FlipRun out;
  double prev = s.standardized_weights()[0];
  for (std::size_t t = 1; t <= 300; ++t) {
    JointDecision j;
    if (t <= 100) {
      j.probs = s.probabilities(xi);
      j.action = Action::kAcquire;
      s.update_weights(xi, j, 1.0);
    } else {
      j = s.decide(xi, rng);
      s.update_weights(xi, j, 0.0);
    }
    const bool flipped = s.ewma_step(t);
    if (flipped && out.first_flip == 0) out.first_flip = t;
    if (t <= 100) {
      const double w = s.standardized_weights()[0];
      out.monotone = out.monotone && w >= prev;
      prev = w;
    }
  }
  return out;
}

Outcome flip_behavior() {
  const auto on = crafted_stream(true), off = crafted_stream(false);
  const bool ok = on.first_flip > 0 && on.first_flip <= 300 && off.first_flip == 0 && off.monotone;
  return {ok, fmt("monitoring on: first flip at t=%zu; monitoring off: %s, favored weight %s", on.first_flip,
                  off.first_flip ? "flipped" : "no flip", off.monotone ? "nondecreasing" : "decreased")};
}

Outcome throughput() {
  auto c = scenario("cbeal-6", 1000, 15, 0.3);
  const auto m = run_experiment(c, 1);
  const double s = m.summary.mean_step_seconds;
  return {s <= 0.5, fmt("mean %.5f s per step over %zu steps", s, m.steps.size())};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"toy reproduction", toy_reproduction},
      {"scenario grid ordering", grid_ordering},
      {"LD expectation vs Monte Carlo", theory_check},
      {"exchangeability", exchangeability},
      {"invariant suite", invariants},
      {"gradient vs finite differences", gradient_check},
      {"flip behavior", flip_behavior},
      {"throughput", throughput},
  };
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::fprintf(stderr, "--only must be in 1..%zu\n", criteria.size());
    return 2;
  }
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures ? 1 : 0;
}
