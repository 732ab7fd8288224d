#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "cbeal/agents.hpp"
#include "cbeal/core.hpp"
#include "cbeal/learner.hpp"

namespace cbeal {

using Rng = std::mt19937_64;

inline constexpr std::size_t kArms = 2;

enum class Action : int { kAcquire = 1, kPass = 2 };

// Per-agent probability vector over {acquire, pass}.
struct DecisionVector {
  std::array<double, kArms> probs{0.0, 1.0};

  static DecisionVector acquire_with(double p) { return {{p, 1.0 - p}}; }
  double operator[](std::size_t a) const { return probs[a]; }
};

// Welford running mean/variance.
struct RunningVariance {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x);
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
};

struct ExpertState {
  double weight = 1.0;
  double ewma = 0.0;
  RunningVariance history;
};

struct SolverConfig {
  std::size_t experts = 1;
  std::size_t horizon = 2000;   // T
  double p_min = -1.0;          // negative: sqrt(ln N / (K T))
  double delta = 0.1;           // confidence level, carried for reporting
  double lambda = 0.3;
  double h = 5.0;
  bool gamma_grows = true;      // gamma_t = t / T, else gamma = gamma_constant
  double gamma_constant = 0.0;
  std::size_t warmup = 10;
  bool monitoring = true;

  double exploration_bonus() const;  // sqrt(ln N / (K T))
  double resolved_p_min() const;
  void validate() const;
};

struct JointDecision {
  std::array<double, kArms> probs{};
  Action action = Action::kPass;

  double operator[](std::size_t a) const { return probs[a]; }
};

// Exp4.P with EWMA monitoring of standardized expert weights.
class Exp4pEwmaSolver {
 public:
  explicit Exp4pEwmaSolver(SolverConfig config);

  // Weighted-majority action probabilities with exploration floor p_min.
  std::array<double, kArms> probabilities(std::span<const DecisionVector> decisions) const;
  JointDecision decide(std::span<const DecisionVector> decisions, Rng& rng) const;

  void update_weights(std::span<const DecisionVector> decisions, const JointDecision& joint,
                      double reward);

  // Runs one monitoring step at time t (1-based). Returns true if weights were flipped.
  bool ewma_step(std::size_t t);

  std::vector<double> standardized_weights() const;
  const std::vector<ExpertState>& experts() const { return experts_; }
  std::vector<ExpertState>& experts() { return experts_; }
  const SolverConfig& config() const { return config_; }
  double p_min() const { return p_min_; }
  double h() const;

 private:
  SolverConfig config_;
  double p_min_;
  double log_h_;
  std::vector<ExpertState> experts_;
};

double reward(Label predicted, Label truth, bool acquired, const RewardSpec& spec);

// Reflects standardized weights about 1/N, clamps at kFlipFloor and renormalises.
std::vector<double> reflect_weights(std::span<const double> standardized);
inline constexpr double kFlipFloor = 1e-6;

struct StepRecord {
  std::size_t t = 0;
  Action action = Action::kPass;
  double reward = 0.0;
  std::size_t budget_used = 0;
  std::vector<double> standardized_weights;
  bool flipped = false;
  bool budget_exhausted = false;
};

using Oracle = std::function<Label(const Sample&)>;

struct ControllerConfig {
  SolverConfig solver{};
  FitConfig fit{};
  RewardSpec rewards{};
  std::size_t budget = 0;
};

// One CbeAL run: agents, solver, labeled pool and base learner.
class Controller {
 public:
  Controller(std::vector<Agent> agents, ControllerConfig config, LabeledPool initial_pool,
             std::uint64_t seed);

  // Processes one stream sample. If the oracle throws, the controller state
  // is left as it was before the call and the exception propagates.
  StepRecord step(const Sample& x, const Oracle& oracle);

  const LogisticModel& model() const { return model_; }
  const LabeledPool& pool() const { return pool_; }
  const std::vector<Agent>& agents() const { return agents_; }
  const Exp4pEwmaSolver& solver() const { return solver_; }
  std::size_t budget_used() const { return budget_used_; }
  std::size_t budget() const { return config_.budget; }
  std::size_t steps() const { return t_; }

 private:
  std::vector<Agent> agents_;
  ControllerConfig config_;
  Exp4pEwmaSolver solver_;
  LabeledPool pool_;
  LogisticModel model_;
  Rng rng_;
  std::size_t budget_used_ = 0;
  std::size_t t_ = 0;
};

}  // namespace cbeal
