#pragma once

#include <cstddef>
#include <string>
#include <variant>

#include "cbeal/core.hpp"
#include "cbeal/learner.hpp"

namespace cbeal {

// What every agent sees for the current stream sample.
struct AcquisitionContext {
  FeatureView features;
  Label predicted;
  ClassDistribution distribution;
};

// Reward constants shared by the bandit (nonnegative penalty) and the RAL
// threshold update (signed penalty).
struct RewardSpec {
  double reward = 1.0;   // acquired and misclassified
  double penalty = 0.5;  // acquired and correctly classified (bandit side)

  double signed_penalty() const { return -std::abs(penalty); }
  void validate() const;
};

// Number of window members whose farthest co-member is nearer than x.
std::size_t lsf(const SlidingWindow& window, FeatureView x);

struct LdAgentState {
  SlidingWindow window;
  double sparsity_fraction;

  LdAgentState(std::size_t capacity, double sparsity);
};

struct SpfAgentState {
  SlidingWindow window;
  explicit SpfAgentState(std::size_t capacity) : window(capacity) {}
};

struct RalAgentState {
  double threshold = 0.95;
  double learning_rate = 0.01;
  RewardSpec rewards{};

  static constexpr double kMinThreshold = 1e-6;
};

// Raw proposals, evaluated against the current window without modifying it.
double ld_probability(const LdAgentState& state, FeatureView x);
double spf_probability(const SpfAgentState& state, FeatureView x);

// Evaluate, then push x into the window.
double ld_propose(LdAgentState& state, FeatureView x);
double spf_propose(SpfAgentState& state, FeatureView x);

double ral_propose(const RalAgentState& state, const AcquisitionContext& ctx);
void ral_update(RalAgentState& state, double signed_reward);

double epsilon_wrap(double p, double epsilon);
double rs_propose(std::size_t budget, std::size_t stream_size);
double us_propose(double certainty, double threshold);

double clip_probability(double p);

struct RandomAgent {
  double probability = 0.0;
};

struct UncertaintyAgent {
  double threshold = 0.7;
};

// Outcome of one controller step, as far as agent bookkeeping is concerned.
struct StepFeedback {
  FeatureView features;
  bool acquired = false;
  double own_vote = 0.0;          // this agent's acquisition probability
  std::optional<Label> truth;     // present iff acquired
  Label predicted = Label::kNegative;
};

// A named acquisition criterion with optional epsilon-greedy forcing.
class Agent {
 public:
  using Criterion =
      std::variant<LdAgentState, SpfAgentState, RalAgentState, UncertaintyAgent, RandomAgent>;

  Agent(std::string name, Criterion criterion, double epsilon = 0.0);

  const std::string& name() const { return name_; }
  double epsilon() const { return epsilon_; }
  const Criterion& criterion() const { return criterion_; }

  // Seeds exploration windows with initial-pool inputs.
  void seed(const LabeledPool& pool);

  // Clipped, epsilon-wrapped acquisition probability. Does not change state.
  double propose(const AcquisitionContext& ctx) const;

  void update(const StepFeedback& feedback);

 private:
  std::string name_;
  Criterion criterion_;
  double epsilon_;
};

}  // namespace cbeal
