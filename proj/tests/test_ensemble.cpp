#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "cbeal/ensemble.hpp"

using namespace cbeal;

namespace {

SolverConfig solver_config(std::size_t n, double p_min) {
  SolverConfig c;
  c.experts = n;
  c.p_min = p_min;
  return c;
}

std::vector<DecisionVector> votes(std::initializer_list<double> ps) {
  std::vector<DecisionVector> v;
  for (double p : ps) v.push_back(DecisionVector::acquire_with(p));
  return v;
}

LabeledPool line_pool() {
  LabeledPool pool;
  for (int i = 0; i < 10; ++i) {
    const double x = -2.0 + 0.4 * i;
    pool.add({x, 0.1 * i}, x > 0 ? Label::kPositive : Label::kNegative);
  }
  return pool;
}

std::vector<Sample> line_stream(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.5);
  std::vector<Sample> s;
  for (std::size_t i = 0; i < n; ++i) {
    Features x{g(rng), g(rng)};
    s.push_back({x, x[0] + 0.3 * x[1] > 0 ? Label::kPositive : Label::kNegative, i});
  }
  return s;
}

Label oracle(const Sample& s) { return *s.label; }

}  // namespace

TEST_CASE("decide probabilities") {
  Exp4pEwmaSolver s(solver_config(2, 0.1));
  auto p = s.probabilities(votes({1.0, 0.0}));
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));

  s.experts()[0].weight = 3.0;
  p = s.probabilities(votes({1.0, 0.0}));
  CHECK(p[0] == doctest::Approx(0.7));
  CHECK(p[1] == doctest::Approx(0.3));

  Exp4pEwmaSolver c(solver_config(3, 0.0));
  p = c.probabilities(votes({1.0, 1.0, 1.0}));
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 0.0);

  std::vector<DecisionVector> bad{{{0.6, 0.6}}, {{1.0, 0.0}}};
  CHECK_THROWS_AS(s.probabilities(bad), DomainError);
  std::vector<DecisionVector> neg{{{-0.1, 1.1}}, {{1.0, 0.0}}};
  CHECK_THROWS_AS(s.probabilities(neg), DomainError);
  CHECK_THROWS_AS(s.probabilities(votes({1.0})), DimensionError);
}

TEST_CASE("default exploration floor") {
  SolverConfig c;
  c.experts = 6;
  CHECK(c.resolved_p_min() == doctest::Approx(std::sqrt(std::log(6.0) / 4000.0)));
  c.p_min = 0.6;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("reward values") {
  const RewardSpec spec;
  CHECK(reward(Label::kNegative, Label::kPositive, true, spec) == 1.0);
  CHECK(reward(Label::kPositive, Label::kPositive, true, spec) == 0.5);
  CHECK(reward(Label::kPositive, Label::kNegative, false, spec) == 0.0);
  CHECK_THROWS_AS((RewardSpec{0.5, 0.5}.validate()), ConfigError);
}

TEST_CASE("weight update examples") {
  Exp4pEwmaSolver s(solver_config(1, 0.1));
  JointDecision j{{0.5, 0.5}, Action::kAcquire};
  s.update_weights(votes({1.0}), j, 1.0);
  CHECK(s.experts()[0].weight == doctest::Approx(std::exp(0.1)).epsilon(1e-12));

  Exp4pEwmaSolver z(solver_config(1, 0.1));
  z.update_weights(votes({1.0}), j, 0.0);
  CHECK(z.experts()[0].weight == 1.0);

  Exp4pEwmaSolver o(solver_config(1, 0.1));
  o.update_weights(votes({0.0}), j, 1.0);
  CHECK(o.experts()[0].weight == 1.0);

  CHECK_THROWS_AS(o.update_weights(votes({0.0}), j, -1.0), DomainError);
}

TEST_CASE("reflection") {
  const std::vector<double> pair{0.9, 0.1};
  const auto r = reflect_weights(pair);
  CHECK(r[0] == doctest::Approx(0.1));
  CHECK(r[1] == doctest::Approx(0.9));

  std::vector<double> six{0.5, 0.1, 0.1, 0.1, 0.1, 0.1};
  const auto c = reflect_weights(six);
  const double denom = kFlipFloor + 5.0 * (2.0 / 6.0 - 0.1);
  CHECK(c[0] == doctest::Approx(kFlipFloor / denom));
  CHECK(c[1] == doctest::Approx((2.0 / 6.0 - 0.1) / denom));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> w(2 + trial % 7);
    for (double& v : w) v = u(rng);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) v /= sum;
    const auto out = reflect_weights(w);
    CHECK(std::abs(std::accumulate(out.begin(), out.end(), 0.0) - 1.0) < 1e-12);
    for (double v : out) CHECK(v > 0.0);
  }
}

TEST_CASE("ewma step flips when the chart is exceeded") {
  Exp4pEwmaSolver s(solver_config(2, 0.1));
  s.experts()[0].weight = 9.0;
  s.experts()[1].weight = 1.0;
  // History variance v chosen so that h * lambda/(2-lambda) * v = 0.1.
  const double v = 0.1 / (5.0 * 0.3 / 1.7);
  for (auto& e : s.experts()) {
    e.history.count = 10;
    e.history.mean = 0.5;
    e.history.m2 = v * 9.0;
  }
  CHECK(s.ewma_step(1));
  const auto w = s.standardized_weights();
  CHECK(w[0] == doctest::Approx(0.1));
  CHECK(w[1] == doctest::Approx(0.9));
  CHECK(s.experts()[0].weight + s.experts()[1].weight == doctest::Approx(10.0));
  CHECK(s.experts()[0].ewma == doctest::Approx(0.1));
  CHECK(s.h() == doctest::Approx(5.0 * std::exp(1.0 / 2000.0)));
}

TEST_CASE("ewma step inside the limits leaves weights alone") {
  Exp4pEwmaSolver s(solver_config(2, 0.1));
  s.experts()[0].weight = 0.55;
  s.experts()[1].weight = 0.45;
  for (auto& e : s.experts()) {
    e.history.count = 10;
    e.history.m2 = 9.0;
  }
  CHECK_FALSE(s.ewma_step(1));
  CHECK(s.experts()[0].weight == 0.55);
  CHECK(s.experts()[0].ewma == doctest::Approx(0.3 * 0.55 + 0.7 * 0.5));
}

TEST_CASE("solver invariants over random steps") {
  for (std::size_t n : {1u, 2u, 6u}) {
    SolverConfig cfg;
    cfg.experts = n;
    Exp4pEwmaSolver s(cfg);
    Rng rng(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> rd(0, 2);
    const double rewards[] = {0.0, 0.5, 1.0};
    for (std::size_t t = 1; t <= 10000; ++t) {
      std::vector<DecisionVector> xi;
      for (std::size_t i = 0; i < n; ++i) {
        const double p = u(rng);
        xi.push_back(DecisionVector::acquire_with(p < 0.2 ? 0.0 : (p > 0.8 ? 1.0 : p)));
      }
      const auto j = s.decide(xi, rng);
      REQUIRE(std::abs(j[0] + j[1] - 1.0) < 1e-9);
      REQUIRE(j[0] >= s.p_min() - 1e-15);
      REQUIRE(j[1] >= s.p_min() - 1e-15);
      REQUIRE(j[0] <= 1.0 - s.p_min() + 1e-15);
      const double r = j.action == Action::kAcquire ? rewards[rd(rng)] : 0.0;
      s.update_weights(xi, j, r);
      s.ewma_step(t);
      for (const auto& e : s.experts()) {
        REQUIRE(e.weight > 0.0);
        REQUIRE(std::isfinite(e.weight));
      }
    }
  }
}

TEST_CASE("monitoring off lets one expert dominate") {
  SolverConfig cfg;
  cfg.experts = 4;
  cfg.monitoring = false;
  Exp4pEwmaSolver s(cfg);
  Rng rng(1);
  auto xi = votes({1.0, 0.0, 0.0, 0.0});
  double prev = s.standardized_weights()[0];
  for (std::size_t t = 1; t <= 100; ++t) {
    const JointDecision j{s.probabilities(xi), Action::kAcquire};
    s.update_weights(xi, j, 1.0);
    CHECK_FALSE(s.ewma_step(t));
    const double w = s.standardized_weights()[0];
    CHECK(w >= prev);
    prev = w;
  }
  CHECK(prev > 0.25);
}

TEST_CASE("controller acquires every step under consensus") {
  ControllerConfig cfg;
  cfg.solver.p_min = 0.0;
  cfg.budget = 15;
  std::vector<Agent> agents{Agent("all", RandomAgent{1.0})};
  Controller c(agents, cfg, line_pool(), 3);
  const auto stream = line_stream(40, 8);
  std::size_t acquired = 0;
  for (const auto& x : stream) {
    const auto rec = c.step(x, oracle);
    if (rec.action == Action::kAcquire) ++acquired;
    CHECK(rec.budget_used <= cfg.budget);
    if (rec.t <= 15) {
      CHECK(rec.action == Action::kAcquire);
    } else {
      CHECK(rec.budget_exhausted);
    }
  }
  CHECK(acquired == 15);
  CHECK(c.pool().size() == 25);
}

TEST_CASE("exhausted budget skips solver updates") {
  ControllerConfig cfg;
  cfg.budget = 0;
  Controller c({Agent("a", RandomAgent{1.0}), Agent("b", RandomAgent{0.0})}, cfg, line_pool(), 1);
  const auto before = c.solver().standardized_weights();
  for (const auto& x : line_stream(5, 2)) {
    const auto rec = c.step(x, oracle);
    CHECK(rec.action == Action::kPass);
    CHECK(rec.budget_exhausted);
  }
  CHECK(c.solver().standardized_weights() == before);
  CHECK(c.solver().experts()[0].history.count == 0);
}

TEST_CASE("controller is deterministic for a seed") {
  auto run = [](std::uint64_t seed) {
    ControllerConfig cfg;
    cfg.budget = 10;
    RalAgentState ral;
    std::vector<Agent> agents{Agent("ld", LdAgentState(20, 0.05)), Agent("ral", ral, 0.01)};
    Controller c(agents, cfg, line_pool(), seed);
    std::vector<StepRecord> out;
    for (const auto& x : line_stream(200, 4)) out.push_back(c.step(x, oracle));
    return out;
  };
  const auto a = run(42), b = run(42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].action == b[i].action);
    CHECK(a[i].reward == b[i].reward);
    CHECK(a[i].standardized_weights == b[i].standardized_weights);
    CHECK(a[i].flipped == b[i].flipped);
  }
  CHECK(a.back().budget_used <= 10);
}

TEST_CASE("oracle failure leaves the controller unchanged") {
  ControllerConfig cfg;
  cfg.budget = 5;
  Controller c({Agent("all", RandomAgent{1.0})}, cfg, line_pool(), 9);
  const auto stream = line_stream(3, 1);
  const auto model = c.model();
  Oracle broken = [](const Sample&) -> Label { throw std::runtime_error("offline"); };
  CHECK_THROWS(c.step(stream[0], broken));
  CHECK(c.steps() == 0);
  CHECK(c.budget_used() == 0);
  CHECK(c.pool().size() == 10);
  CHECK(c.model() == model);

  Controller fresh({Agent("all", RandomAgent{1.0})}, cfg, line_pool(), 9);
  const auto r1 = c.step(stream[0], oracle);
  const auto r2 = fresh.step(stream[0], oracle);
  CHECK(r1.action == r2.action);
  CHECK(r1.standardized_weights == r2.standardized_weights);
}

TEST_CASE("reward uses the model from before the refit") {
  ControllerConfig cfg;
  cfg.solver.p_min = 0.0;
  cfg.budget = 1;
  Controller c({Agent("all", RandomAgent{1.0})}, cfg, line_pool(), 1);
  // Far on the positive side but labeled negative: the pre-refit model is wrong.
  const Sample x{{5.0, 0.0}, Label::kNegative, 0};
  const auto rec = c.step(x, oracle);
  CHECK(rec.reward == 1.0);
}
