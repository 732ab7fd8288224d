#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "cbeal/core.hpp"

namespace cbeal {

enum class Penalty { kNone, kL1, kL2 };

struct Regularization {
  Penalty penalty = Penalty::kL2;
  double strength = 0.0;

  bool operator==(const Regularization&) const = default;
};

struct FitConfig {
  Regularization regularization{};
  std::size_t max_iterations = 500;
  double step_scale = 0.1;          // step = step_scale / (1 + Lipschitz bound)
  double gradient_tolerance = 1e-6;
};

// Binary class probabilities, indexed by class.
struct ClassDistribution {
  std::array<double, 2> probabilities{0.5, 0.5};

  double operator[](std::size_t c) const { return probabilities[c]; }
  double max() const;
};

// Binary logistic regression parameters. A degenerate model stands in for a
// single-class training pool and predicts that class with fixed confidence.
struct LogisticModel {
  Features weights;
  double bias = 0.0;
  Regularization regularization{};
  std::optional<Label> degenerate_class;

  static constexpr double kDegenerateConfidence = 1.0 - 1e-3;

  std::size_t dimension() const { return weights.size(); }
  bool operator==(const LogisticModel&) const = default;
};

// Regularised mean negative log-likelihood and its (sub)gradient, with the
// bias stored last in the gradient vector. The bias is never penalised.
struct LossAndGradient {
  double loss = 0.0;
  Features gradient;
};
LossAndGradient logistic_loss(const LabeledPool& pool, FeatureView weights, double bias,
                              const Regularization& reg);

// Lipschitz upper bound for the smooth part of the loss (trace bound).
double lipschitz_bound(const LabeledPool& pool, const Regularization& reg);

struct FitTrace {
  std::vector<double> losses;  // objective after each accepted iterate, starting at zero init
};

// Full-batch deterministic fit from zero initialisation. L1 uses a proximal
// (soft-threshold) step so every iterate lowers the objective.
LogisticModel fit(const LabeledPool& pool, const FitConfig& config, FitTrace* trace = nullptr);

ClassDistribution predict_proba(const LogisticModel& model, FeatureView x);
Label predict(const LogisticModel& model, FeatureView x);
double certainty(const LogisticModel& model, FeatureView x);

double sigmoid(double z);

}  // namespace cbeal
