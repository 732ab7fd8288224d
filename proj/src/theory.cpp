#include "cbeal/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/erf.hpp>

#include "cbeal/agents.hpp"
#include "cbeal/kernels.hpp"

namespace cbeal::theory {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_quantile(double p) { return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p); }

constexpr double kEulerGamma = 0.57721566490153286061;

}  // namespace

void TheoryParams::validate() const {
  if (q == 0) throw DomainError("q must be at least 1");
  if (window < 2) throw DomainError("window must hold at least 2 points");
  if (!(sparsity > 0.0 && sparsity <= 1.0)) throw DomainError("sparsity must be in (0,1]");
  if (!(var_window > 0.0 && var_incoming > 0.0)) throw DomainError("variances must be positive");
  if (center_dist_sq < 0.0 || spread_dist_sq < 0.0) throw DomainError("squared distances must be >= 0");
}

Moments squared_distance_moments(double center_dist_sq, double var_a, double var_b, std::size_t q) {
  const double s = var_a + var_b;
  const double qd = static_cast<double>(q);
  return {center_dist_sq + s * qd, 4.0 * s * center_dist_sq + 2.0 * qd * s * s};
}

double expected_ld_acquisition(const TheoryParams& params, const QuadratureOptions& opts) {
  params.validate();
  const Moments x = squared_distance_moments(params.spread_dist_sq, params.var_window,
                                             params.var_window, params.q);
  const Moments y = squared_distance_moments(params.center_dist_sq, params.var_window,
                                             params.var_incoming, params.q);
  const double sx = std::sqrt(x.variance);
  const double sy = std::sqrt(y.variance);
  const double others = static_cast<double>(params.window - 1);

  // P(max of L-1 window distances < incoming distance), one member's term.
  const auto integrand = [&](double v) {
    return std::pow(normal_cdf((v - x.mean) / sx), others) * normal_pdf((v - y.mean) / sy) / sy;
  };
  const double lo = std::max(0.0, y.mean - 8.0 * sy);
  const double hi = y.mean + 8.0 * sy;
  const auto integrate = [&](std::size_t nodes) {
    return opts.parallel ? kernels::trapezoid_parallel(integrand, lo, hi, nodes)
                         : kernels::trapezoid_serial(integrand, lo, hi, nodes);
  };
  const double fine = integrate(opts.nodes);
  const double coarse = integrate((opts.nodes + 1) / 2);
  if (std::abs(fine - coarse) > opts.tolerance * std::max(1.0, std::abs(fine)))
    throw Error("LD quadrature did not converge");

  // L identical member terms over L * delta_L.
  return fine / params.sparsity;
}

McEstimate mc_ld_acquisition(const TheoryParams& params, bool parallel) {
  params.validate();
  if (params.spread_dist_sq != 0.0)
    throw DomainError("Monte Carlo LD oracle supports a single window distribution only");
  if (params.draws < 1000) throw DomainError("Monte Carlo needs at least 1000 draws");

  const double shift = std::sqrt(params.center_dist_sq);
  const double sd_w = std::sqrt(params.var_window);
  const double sd_in = std::sqrt(params.var_incoming);
  const double denom = static_cast<double>(params.window) * params.sparsity;

  const kernels::ShardFn shard = [&](std::uint64_t seed, std::size_t count,
                                     std::span<kernels::Moments1> out) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Features point(params.q);
    for (std::size_t d = 0; d < count; ++d) {
      SlidingWindow w(params.window);
      for (std::size_t j = 0; j < params.window; ++j) {
        for (double& v : point) v = sd_w * gauss(rng);
        w.push(point);
      }
      for (double& v : point) v = sd_in * gauss(rng);
      point[0] += shift;
      const auto count_far = static_cast<double>(lsf(w, point));
      out[0].add(count_far / denom);
      out[1].add(clip_probability(count_far / denom));
      out[2].add(count_far);
    }
  };
  const auto stats = parallel ? kernels::sharded_parallel(params.draws, 3, params.seed, shard)
                              : kernels::sharded_serial(params.draws, 3, params.seed, shard);
  return {stats[0].mean(), stats[0].se(), stats[1].mean(), stats[1].se(), stats[2].mean(), stats[2].se()};
}

double gev_expected_max(const TheoryParams& params) {
  params.validate();
  if (params.window < 3) throw DomainError("GEV approximation needs a window of at least 3");
  const Moments x = squared_distance_moments(params.spread_dist_sq, params.var_window,
                                             params.var_window, params.q);
  const double tail = 1.0 / static_cast<double>(params.window - 1);
  const double loc = normal_quantile(1.0 - tail);
  const double scale = normal_quantile(1.0 - tail * std::exp(-1.0)) - loc;
  return x.mean + std::sqrt(x.variance) * (loc + kEulerGamma * scale);
}

double m2_equation(const TheoryParams& params, double m1, double center_dist_sq) {
  const Moments y = squared_distance_moments(center_dist_sq, params.var_window, params.var_incoming,
                                             params.q);
  const double quantile = boost::math::erf_inv(1.0 - 2.0 * params.sparsity);
  return y.mean + quantile * std::sqrt(2.0 * std::max(0.0, y.variance)) - m1;
}

Thresholds solve_m2(const TheoryParams& params, double slack) {
  params.validate();
  if (params.sparsity >= 0.5) throw DomainError("solve_m2 requires delta_L < 0.5");
  Thresholds out;
  out.m1 = slack * gev_expected_max(params);

  // The incoming-distance variance vanishes at this lower end of the domain.
  const double s = params.var_window + params.var_incoming;
  double lo = -0.5 * static_cast<double>(params.q) * s;
  double hi = std::max(1.0, out.m1);
  const auto g = [&](double d) { return m2_equation(params, out.m1, d); };
  if (g(lo) > 0.0) throw Error("M2 root equation has no sign change: already satisfied at the lower end");
  for (int k = 0; g(hi) < 0.0; ++k) {
    if (k > 200) throw Error("M2 root equation has no sign change in bracket");
    hi *= 2.0;
  }
  for (int it = 0; it < 400 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  out.m2 = 0.5 * (lo + hi);
  out.residual = g(out.m2);
  return out;
}

std::vector<RalSweepPoint> mc_ral_nonconvergence(const TheoryParams& params,
                                                 const std::vector<double>& distances,
                                                 const RalSweepConfig& config, bool parallel) {
  params.validate();
  if (params.q < 2) throw DomainError("RAL sweep needs q >= 2");
  if (config.pool_size < 4 || config.pool_resamples < 2 || config.draws_per_pool == 0)
    throw DomainError("RAL sweep needs a pool of >= 4 points and >= 2 resamples");

  const double sd_w = std::sqrt(params.var_window);
  const double sd_in = std::sqrt(params.var_incoming);
  const std::size_t resamples = config.pool_resamples;

  std::vector<RalSweepPoint> out;
  for (std::size_t di = 0; di < distances.size(); ++di) {
    const double shift = std::sqrt(distances[di]);
    std::vector<double> pool_means(resamples);

    const auto one_pool = [&](std::size_t r) {
      // Pool depends only on r so every distance sees the same fitted models.
      std::mt19937_64 rng(kernels::shard_seed(params.seed, r));
      std::normal_distribution<double> gauss(0.0, 1.0);
      LabeledPool pool;
      for (std::size_t i = 0; i < config.pool_size; ++i) {
        const Label y = i % 2 == 0 ? Label::kNegative : Label::kPositive;
        Features x(params.q);
        for (double& v : x) v = sd_w * gauss(rng);
        x[0] += y == Label::kPositive ? config.class_offset : -config.class_offset;
        pool.add(std::move(x), y);
      }
      const LogisticModel model = fit(pool, config.fit);
      if (model.degenerate_class) throw Error("degenerate pool in RAL sweep");

      std::mt19937_64 draw_rng(kernels::shard_seed(params.seed ^ 0x5bd1e995ULL, r * 7919 + di));
      Features x(params.q);
      std::size_t hits = 0;
      for (std::size_t d = 0; d < config.draws_per_pool; ++d) {
        for (double& v : x) v = sd_in * gauss(draw_rng);
        x[1] += shift;
        hits += certainty(model, x) < config.theta;
      }
      pool_means[r] = static_cast<double>(hits) / static_cast<double>(config.draws_per_pool);
    };

    if (parallel) {
      std::vector<std::string> errors(resamples);
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(resamples); ++r) {
        try {
          one_pool(static_cast<std::size_t>(r));
        } catch (const std::exception& e) {
          errors[static_cast<std::size_t>(r)] = e.what();
        }
      }
      for (const auto& e : errors)
        if (!e.empty()) throw Error(e);
    } else {
      for (std::size_t r = 0; r < resamples; ++r) one_pool(r);
    }

    RalSweepPoint pt;
    pt.center_dist_sq = distances[di];
    double sum = 0.0;
    for (double m : pool_means) sum += m;
    pt.mean = sum / static_cast<double>(resamples);
    double ss = 0.0;
    for (double m : pool_means) ss += (m - pt.mean) * (m - pt.mean);
    pt.between_pool_std = std::sqrt(ss / static_cast<double>(resamples - 1));
    pt.indicator_std = std::sqrt(pt.mean * (1.0 - pt.mean));
    out.push_back(pt);
  }
  return out;
}

std::vector<GridRow> verify_grid(TheoryParams params, const std::vector<double>& grid,
                                 double additive_slack) {
  std::vector<GridRow> rows;
  for (double d : grid) {
    params.center_dist_sq = d;
    GridRow row;
    row.center_dist_sq = d;
    row.closed_form = expected_ld_acquisition(params);
    const McEstimate mc = mc_ld_acquisition(params);
    row.mc_mean = mc.mean;
    row.mc_se = mc.se;
    row.mc_clipped = mc.clipped_mean;
    row.within_tol = std::abs(row.closed_form - mc.mean) <= 3.0 * mc.se + additive_slack;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace cbeal::theory
