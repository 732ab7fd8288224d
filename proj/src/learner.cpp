#include "cbeal/learner.hpp"

#include <algorithm>
#include <cmath>

namespace cbeal {

double ClassDistribution::max() const {
  return std::max(probabilities[0], probabilities[1]);
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double penalty_value(FeatureView w, const Regularization& reg) {
  double s = 0.0;
  switch (reg.penalty) {
    case Penalty::kNone:
      return 0.0;
    case Penalty::kL1:
      for (double v : w) s += std::abs(v);
      return reg.strength * s;
    case Penalty::kL2:
      for (double v : w) s += v * v;
      return 0.5 * reg.strength * s;
  }
  return 0.0;
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

struct Smooth {
  double loss;
  Features gradient;  // weights then bias
};

// Mean NLL plus the L2 term (the smooth part of the objective).
Smooth smooth_part(const LabeledPool& pool, FeatureView w, double b, const Regularization& reg) {
  const std::size_t p = w.size();
  Smooth out{0.0, Features(p + 1, 0.0)};
  for (const auto& e : pool.entries()) {
    double z = b;
    for (std::size_t k = 0; k < p; ++k) z += w[k] * e.features[k];
    const double y = e.label == Label::kPositive ? 1.0 : 0.0;
    out.loss += softplus(z) - y * z;
    const double r = sigmoid(z) - y;
    for (std::size_t k = 0; k < p; ++k) out.gradient[k] += r * e.features[k];
    out.gradient[p] += r;
  }
  const double n = static_cast<double>(pool.size());
  out.loss /= n;
  for (double& g : out.gradient) g /= n;
  if (reg.penalty == Penalty::kL2) {
    out.loss += penalty_value(w, reg);
    for (std::size_t k = 0; k < p; ++k) out.gradient[k] += reg.strength * w[k];
  }
  return out;
}

double objective(const LabeledPool& pool, FeatureView w, double b, const Regularization& reg) {
  double v = smooth_part(pool, w, b, Regularization{Penalty::kNone, 0.0}).loss;
  return v + penalty_value(w, reg);
}

}  // namespace

LossAndGradient logistic_loss(const LabeledPool& pool, FeatureView weights, double bias,
                              const Regularization& reg) {
  if (pool.empty()) throw DomainError("logistic loss of an empty pool");
  if (weights.size() != pool.dimension()) throw DimensionError("weight length mismatch");
  Smooth s = smooth_part(pool, weights, bias, reg);
  if (reg.penalty == Penalty::kL1) {
    s.loss += penalty_value(weights, reg);
    for (std::size_t k = 0; k < weights.size(); ++k) s.gradient[k] += reg.strength * sign(weights[k]);
  }
  return {s.loss, std::move(s.gradient)};
}

double lipschitz_bound(const LabeledPool& pool, const Regularization& reg) {
  double trace = 0.0;
  for (const auto& e : pool.entries()) {
    double sq = 1.0;  // bias column
    for (double v : e.features) sq += v * v;
    trace += sq;
  }
  double bound = 0.25 * trace / static_cast<double>(pool.size());
  if (reg.penalty == Penalty::kL2) bound += reg.strength;
  return bound;
}

LogisticModel fit(const LabeledPool& pool, const FitConfig& config, FitTrace* trace) {
  if (pool.empty()) throw DomainError("cannot fit on an empty pool");
  const std::size_t p = pool.dimension();

  LogisticModel model;
  model.weights.assign(p, 0.0);
  model.regularization = config.regularization;

  const std::size_t positives = pool.count(Label::kPositive);
  if (positives == 0 || positives == pool.size()) {
    model.degenerate_class = positives == 0 ? Label::kNegative : Label::kPositive;
    return model;
  }

  const Regularization& reg = config.regularization;
  const double step = config.step_scale / (1.0 + lipschitz_bound(pool, reg));
  Features& w = model.weights;
  double& b = model.bias;
  if (trace) trace->losses.push_back(objective(pool, w, b, reg));

  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    const Smooth s = smooth_part(pool, w, b, reg);

    // Stationarity measure: gradient norm, or the prox-gradient mapping for L1.
    double norm2 = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
      double g = s.gradient[k];
      if (reg.penalty == Penalty::kL1) {
        const double t = w[k] - step * g;
        const double shrunk = sign(t) * std::max(std::abs(t) - step * reg.strength, 0.0);
        g = (w[k] - shrunk) / step;
      }
      norm2 += g * g;
    }
    norm2 += s.gradient[p] * s.gradient[p];
    if (std::sqrt(norm2) < config.gradient_tolerance) break;

    for (std::size_t k = 0; k < p; ++k) {
      double v = w[k] - step * s.gradient[k];
      if (reg.penalty == Penalty::kL1) {
        v = sign(v) * std::max(std::abs(v) - step * reg.strength, 0.0);
        if (std::abs(v) < 1e-8) v = 0.0;
      }
      w[k] = v;
    }
    b -= step * s.gradient[p];
    if (trace) trace->losses.push_back(objective(pool, w, b, reg));
  }
  return model;
}

ClassDistribution predict_proba(const LogisticModel& model, FeatureView x) {
  if (x.size() != model.dimension()) throw DimensionError("feature length mismatch in predict");
  if (!all_finite(x)) throw DomainError("non-finite input to predict");
  if (model.degenerate_class) {
    const double hi = LogisticModel::kDegenerateConfidence;
    return *model.degenerate_class == Label::kPositive ? ClassDistribution{{1.0 - hi, hi}}
                                                       : ClassDistribution{{hi, 1.0 - hi}};
  }
  double z = model.bias;
  for (std::size_t k = 0; k < x.size(); ++k) z += model.weights[k] * x[k];
  const double p1 = sigmoid(z);
  return ClassDistribution{{1.0 - p1, p1}};
}

Label predict(const LogisticModel& model, FeatureView x) {
  const auto d = predict_proba(model, x);
  return d[1] > d[0] ? Label::kPositive : Label::kNegative;
}

double certainty(const LogisticModel& model, FeatureView x) { return predict_proba(model, x).max(); }

}  // namespace cbeal
