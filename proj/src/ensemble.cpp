#include "cbeal/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cbeal {

void RunningVariance::add(double x) {
  ++count;
  const double d = x - mean;
  mean += d / static_cast<double>(count);
  m2 += d * (x - mean);
}

double SolverConfig::exploration_bonus() const {
  return std::sqrt(std::log(static_cast<double>(experts)) /
                   (static_cast<double>(kArms) * static_cast<double>(horizon)));
}

double SolverConfig::resolved_p_min() const { return p_min < 0.0 ? exploration_bonus() : p_min; }

void SolverConfig::validate() const {
  if (experts == 0) throw ConfigError("solver needs at least one expert");
  if (horizon == 0) throw ConfigError("horizon must be positive");
  if (resolved_p_min() > 1.0 / static_cast<double>(kArms)) throw ConfigError("p_min must be <= 1/K");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("lambda must be in (0,1]");
  if (!(h > 0.0)) throw ConfigError("h must be positive");
}

Exp4pEwmaSolver::Exp4pEwmaSolver(SolverConfig config)
    : config_(config), p_min_(config.resolved_p_min()), log_h_(std::log(config.h)) {
  config_.validate();
  const double mu = 1.0 / static_cast<double>(config_.experts);
  experts_.assign(config_.experts, ExpertState{1.0, mu, {}});
}

double Exp4pEwmaSolver::h() const { return std::exp(log_h_); }

namespace {

void check_decisions(std::span<const DecisionVector> decisions, std::size_t n) {
  if (decisions.size() != n) throw DimensionError("decision count does not match expert count");
  for (const auto& d : decisions) {
    double sum = 0.0;
    for (double v : d.probs) {
      if (!(v >= 0.0 && v <= 1.0)) throw DomainError("decision entry outside [0,1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError("decision vector does not sum to 1");
  }
}

}  // namespace

std::array<double, kArms> Exp4pEwmaSolver::probabilities(
    std::span<const DecisionVector> decisions) const {
  check_decisions(decisions, experts_.size());
  double total = 0.0;
  for (const auto& e : experts_) total += e.weight;
  std::array<double, kArms> out{};
  const double mix = 1.0 - static_cast<double>(kArms) * p_min_;
  for (std::size_t a = 0; a < kArms; ++a) {
    double s = 0.0;
    for (std::size_t i = 0; i < experts_.size(); ++i) s += experts_[i].weight * decisions[i][a];
    out[a] = mix * s / total + p_min_;
  }
  return out;
}

JointDecision Exp4pEwmaSolver::decide(std::span<const DecisionVector> decisions, Rng& rng) const {
  JointDecision j;
  j.probs = probabilities(decisions);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  j.action = u(rng) < j.probs[0] ? Action::kAcquire : Action::kPass;
  return j;
}

void Exp4pEwmaSolver::update_weights(std::span<const DecisionVector> decisions,
                                     const JointDecision& joint, double r) {
  check_decisions(decisions, experts_.size());
  if (r < 0.0) throw DomainError("bandit reward must be nonnegative");
  const std::size_t chosen = joint.action == Action::kAcquire ? 0 : 1;
  std::array<double, kArms> q{};
  q[chosen] = r / joint.probs[chosen];
  const double bonus = config_.exploration_bonus();
  for (std::size_t i = 0; i < experts_.size(); ++i) {
    double g = 0.0;
    double v = 0.0;
    for (std::size_t a = 0; a < kArms; ++a) {
      if (decisions[i][a] == 0.0) continue;  // arm may have zero mass when p_min = 0
      g += decisions[i][a] * q[a];
      v += decisions[i][a] / joint.probs[a];
    }
    experts_[i].weight *= std::exp(0.5 * p_min_ * (g + v * bonus));
  }
  // Rescale jointly to stay in range; standardized weights are unaffected.
  const double hi = std::max_element(experts_.begin(), experts_.end(), [](const auto& a, const auto& b) {
                      return a.weight < b.weight;
                    })->weight;
  if (hi > 1e200) {
    for (auto& e : experts_) e.weight = std::max(e.weight / hi, std::numeric_limits<double>::min());
  }
}

std::vector<double> reflect_weights(std::span<const double> standardized) {
  const double mu = 1.0 / static_cast<double>(standardized.size());
  std::vector<double> out(standardized.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::max(2.0 * mu - standardized[i], kFlipFloor);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<double> Exp4pEwmaSolver::standardized_weights() const {
  double total = 0.0;
  for (const auto& e : experts_) total += e.weight;
  std::vector<double> s(experts_.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = experts_[i].weight / total;
  return s;
}

bool Exp4pEwmaSolver::ewma_step(std::size_t t) {
  const double lambda = config_.lambda;
  const double mu = 1.0 / static_cast<double>(experts_.size());
  const double width_factor = lambda / (2.0 - lambda);
  std::vector<double> s = standardized_weights();

  bool out_of_control = false;
  for (std::size_t i = 0; i < experts_.size(); ++i) {
    ExpertState& e = experts_[i];
    e.ewma = lambda * s[i] + (1.0 - lambda) * e.ewma;
    if (!config_.monitoring || e.history.count < config_.warmup) continue;
    const double s2 = e.history.variance();
    // h may overflow late in a run; a zero variance gives a zero-width chart.
    const double width = s2 > 0.0 ? std::exp(log_h_ + std::log(width_factor * s2)) : 0.0;
    if (e.ewma > mu + width || e.ewma < mu - width) out_of_control = true;
  }

  if (out_of_control) {
    double total = 0.0;
    for (const auto& e : experts_) total += e.weight;
    s = reflect_weights(s);
    for (std::size_t i = 0; i < experts_.size(); ++i) {
      experts_[i].weight = total * s[i];
      experts_[i].ewma = s[i];
    }
  }
  for (std::size_t i = 0; i < experts_.size(); ++i) experts_[i].history.add(s[i]);

  const double gamma = config_.gamma_grows
                           ? static_cast<double>(t) / static_cast<double>(config_.horizon)
                           : config_.gamma_constant;
  log_h_ += gamma;
  return out_of_control;
}

double reward(Label predicted, Label truth, bool acquired, const RewardSpec& spec) {
  if (!acquired) return 0.0;
  return predicted != truth ? spec.reward : spec.penalty;
}

Controller::Controller(std::vector<Agent> agents, ControllerConfig config, LabeledPool initial_pool,
                       std::uint64_t seed)
    : agents_(std::move(agents)),
      config_([&] {
        config.solver.experts = agents_.size();
        return config;
      }()),
      solver_(config_.solver),
      pool_(std::move(initial_pool)),
      rng_(seed) {
  config_.rewards.validate();
  if (agents_.empty()) throw ConfigError("controller needs at least one agent");
  if (pool_.empty()) throw ConfigError("controller needs a nonempty initial pool");
  for (auto& a : agents_) a.seed(pool_);
  model_ = fit(pool_, config_.fit);
}

StepRecord Controller::step(const Sample& x, const Oracle& oracle) {
  StepRecord rec;
  rec.t = t_ + 1;
  if (x.features.size() != pool_.dimension()) throw DimensionError("stream sample length mismatch");

  if (budget_used_ >= config_.budget) {
    ++t_;
    rec.budget_used = budget_used_;
    rec.standardized_weights = solver_.standardized_weights();
    rec.budget_exhausted = true;
    return rec;
  }

  const ClassDistribution dist = predict_proba(model_, x.features);
  const Label predicted = dist[1] > dist[0] ? Label::kPositive : Label::kNegative;
  const AcquisitionContext ctx{x.features, predicted, dist};

  std::vector<DecisionVector> xi;
  xi.reserve(agents_.size());
  for (const auto& a : agents_) xi.push_back(DecisionVector::acquire_with(a.propose(ctx)));

  Rng rng_before = rng_;
  const JointDecision joint = solver_.decide(xi, rng_);
  const bool acquire = joint.action == Action::kAcquire;

  std::optional<Label> truth;
  if (acquire) {
    try {
      truth = oracle(x);
    } catch (...) {
      rng_ = rng_before;
      throw;
    }
  }

  ++t_;
  double r = 0.0;
  if (acquire) {
    r = reward(predicted, *truth, true, config_.rewards);
    pool_.add(x.features, *truth);
    model_ = fit(pool_, config_.fit);
    ++budget_used_;
  }

  solver_.update_weights(xi, joint, r);
  rec.flipped = solver_.ewma_step(t_);

  for (std::size_t i = 0; i < agents_.size(); ++i)
    agents_[i].update(StepFeedback{x.features, acquire, xi[i][0], truth, predicted});

  rec.action = joint.action;
  rec.reward = r;
  rec.budget_used = budget_used_;
  rec.standardized_weights = solver_.standardized_weights();
  return rec;
}

}  // namespace cbeal
