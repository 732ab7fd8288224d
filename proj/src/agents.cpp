#include "cbeal/agents.hpp"

#include <algorithm>
#include <cmath>

namespace cbeal {

void RewardSpec::validate() const {
  if (!(reward > penalty && penalty >= 0.0))
    throw ConfigError("reward spec requires reward > penalty >= 0");
}

double clip_probability(double p) { return std::clamp(p, 0.0, 1.0); }

std::size_t lsf(const SlidingWindow& window, FeatureView x) {
  if (window.empty()) throw DomainError("lsf of an empty window");
  std::size_t count = 0;
  for (std::size_t j = 0; j < window.size(); ++j)
    if (window.max_dist(j) < euclidean(x, window.point(j))) ++count;
  return count;
}

LdAgentState::LdAgentState(std::size_t capacity, double sparsity)
    : window(capacity), sparsity_fraction(sparsity) {
  if (!(sparsity > 0.0 && sparsity <= 1.0)) throw ConfigError("sparsity fraction must be in (0,1]");
}

double ld_probability(const LdAgentState& state, FeatureView x) {
  if (state.window.empty()) return 1.0;
  const double denom = static_cast<double>(state.window.capacity()) * state.sparsity_fraction;
  return clip_probability(static_cast<double>(lsf(state.window, x)) / denom);
}

double spf_probability(const SpfAgentState& state, FeatureView x) {
  if (state.window.size() < 2) return 1.0;
  const double nearest = state.window.min_dist_to(x);
  const double spread = state.window.max_min_dist();
  if (spread == 0.0) return nearest > 0.0 ? 1.0 : 0.0;
  return clip_probability(nearest / spread);
}

double ld_propose(LdAgentState& state, FeatureView x) {
  const double p = ld_probability(state, x);
  state.window.push(x);
  return p;
}

double spf_propose(SpfAgentState& state, FeatureView x) {
  const double p = spf_probability(state, x);
  state.window.push(x);
  return p;
}

double ral_propose(const RalAgentState& state, const AcquisitionContext& ctx) {
  return ctx.distribution.max() < state.threshold ? 1.0 : 0.0;
}

void ral_update(RalAgentState& state, double signed_reward) {
  const double factor =
      1.0 + state.learning_rate * (1.0 - std::exp2(signed_reward / state.rewards.signed_penalty()));
  state.threshold = std::clamp(state.threshold * factor, RalAgentState::kMinThreshold, 1.0);
}

double epsilon_wrap(double p, double epsilon) { return epsilon + (1.0 - epsilon) * p; }

double rs_propose(std::size_t budget, std::size_t stream_size) {
  if (stream_size == 0) throw DomainError("random sampling needs a nonempty stream");
  return clip_probability(static_cast<double>(budget) / static_cast<double>(stream_size));
}

double us_propose(double certainty, double threshold) { return certainty < threshold ? 1.0 : 0.0; }

Agent::Agent(std::string name, Criterion criterion, double epsilon)
    : name_(std::move(name)), criterion_(std::move(criterion)), epsilon_(epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must be in [0,1]");
}

void Agent::seed(const LabeledPool& pool) {
  auto push_all = [&](SlidingWindow& w) {
    for (const auto& e : pool.entries()) w.push(e.features);
  };
  if (auto* ld = std::get_if<LdAgentState>(&criterion_)) push_all(ld->window);
  if (auto* spf = std::get_if<SpfAgentState>(&criterion_)) push_all(spf->window);
}

double Agent::propose(const AcquisitionContext& ctx) const {
  const double raw = std::visit(
      [&](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LdAgentState>) return ld_probability(c, ctx.features);
        if constexpr (std::is_same_v<T, SpfAgentState>) return spf_probability(c, ctx.features);
        if constexpr (std::is_same_v<T, RalAgentState>) return ral_propose(c, ctx);
        if constexpr (std::is_same_v<T, UncertaintyAgent>)
          return us_propose(ctx.distribution.max(), c.threshold);
        if constexpr (std::is_same_v<T, RandomAgent>) return c.probability;
      },
      criterion_);
  return epsilon_wrap(clip_probability(raw), epsilon_);
}

void Agent::update(const StepFeedback& fb) {
  if (auto* ld = std::get_if<LdAgentState>(&criterion_)) ld->window.push(fb.features);
  if (auto* spf = std::get_if<SpfAgentState>(&criterion_)) spf->window.push(fb.features);
  if (auto* ral = std::get_if<RalAgentState>(&criterion_)) {
    // Credit only agents that voted to acquire on an acquired sample.
    if (fb.acquired && fb.truth && fb.own_vote >= 0.5) {
      const double r = fb.predicted != *fb.truth ? ral->rewards.reward : ral->rewards.signed_penalty();
      ral_update(*ral, r);
    }
  }
}

}  // namespace cbeal
