#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cbeal/learner.hpp"

namespace cbeal::theory {

// Window members are drawn from N(mu_w, var_window * I) and the incoming
// sample from N(mu_in, var_incoming * I), both in q dimensions.
struct TheoryParams {
  std::size_t q = 15;
  std::size_t window = 20;            // L
  double sparsity = 0.05;             // delta_L
  double center_dist_sq = 0.0;        // ||mu_w - mu_in||^2
  double spread_dist_sq = 0.0;        // ||mu_i - mu_j||^2 between window members
  double var_window = 1.0;
  double var_incoming = 1.0;
  std::size_t draws = 10000;
  std::uint64_t seed = 1;

  void validate() const;
};

// Normal approximation of a squared distance between two spherical Gaussian draws.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};
Moments squared_distance_moments(double center_dist_sq, double var_a, double var_b, std::size_t q);

struct QuadratureOptions {
  std::size_t nodes = 4001;   // trapezoid nodes over +-8 sd of the incoming density
  double tolerance = 1e-6;    // relative agreement required with a half-resolution pass
  bool parallel = true;
};

// Unclipped expected LD acquisition probability, E[lsf] / (L delta_L).
double expected_ld_acquisition(const TheoryParams& params, const QuadratureOptions& opts = {});

struct McEstimate {
  double mean = 0.0;          // unclipped lsf / (L delta_L)
  double se = 0.0;
  double clipped_mean = 0.0;  // what the agent actually proposes
  double clipped_se = 0.0;
  double lsf_mean = 0.0;
  double lsf_se = 0.0;
};

// Monte Carlo of the LD proposal using the agent code path. Requires spread_dist_sq == 0.
McEstimate mc_ld_acquisition(const TheoryParams& params, bool parallel = true);

// GEV approximation of E[max_j ||x_i - x_j||^2] over the L-1 co-members.
double gev_expected_max(const TheoryParams& params);

struct Thresholds {
  double m1 = 0.0;
  double m2 = 0.0;
  double residual = 0.0;   // root equation evaluated at m2
};
Thresholds solve_m2(const TheoryParams& params, double slack = 1.05);
// Root equation g(d) whose zero defines M2.
double m2_equation(const TheoryParams& params, double m1, double center_dist_sq);

struct RalSweepConfig {
  double theta = 0.95;
  double class_offset = 1.0;        // classes at mu_w -/+ offset * e1
  std::size_t pool_size = 40;
  std::size_t pool_resamples = 200;
  std::size_t draws_per_pool = 200;
  FitConfig fit{};
};

struct RalSweepPoint {
  double center_dist_sq = 0.0;
  double mean = 0.0;               // mean acquisition indicator
  double between_pool_std = 0.0;   // spread of per-pool E_x[p] across pool resamples
  double indicator_std = 0.0;      // pooled std of the 0/1 indicator
};

// Incoming samples move along e2, orthogonal to the class offset.
std::vector<RalSweepPoint> mc_ral_nonconvergence(const TheoryParams& params,
                                                 const std::vector<double>& distances,
                                                 const RalSweepConfig& config = {},
                                                 bool parallel = true);

struct GridRow {
  double center_dist_sq = 0.0;
  double closed_form = 0.0;
  double mc_mean = 0.0;
  double mc_se = 0.0;
  double mc_clipped = 0.0;
  bool within_tol = false;
};

// Closed form vs Monte Carlo over a grid; tolerance is 3 SE + additive slack.
std::vector<GridRow> verify_grid(TheoryParams params, const std::vector<double>& grid,
                                 double additive_slack = 0.05);

}  // namespace cbeal::theory
