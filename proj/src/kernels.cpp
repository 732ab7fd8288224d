#include "cbeal/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace cbeal::kernels {

std::uint64_t shard_seed(std::uint64_t seed, std::size_t shard) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (shard + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double Moments1::se() const {
  if (count < 2) return 0.0;
  const double n = static_cast<double>(count);
  const double m = sum / n;
  const double var = std::max(0.0, (sum_sq - n * m * m) / (n - 1.0));
  return std::sqrt(var / n);
}

namespace {

void check_nodes(std::size_t nodes) {
  if (nodes < 2) throw std::invalid_argument("trapezoid rule needs at least 2 nodes");
}

std::size_t shard_count(std::size_t total, std::size_t shard) {
  return total / kShards + (shard < total % kShards ? 1 : 0);
}

std::vector<Moments1> combine(const std::vector<std::vector<Moments1>>& per_shard, std::size_t stats) {
  std::vector<Moments1> out(stats);
  for (const auto& s : per_shard)
    for (std::size_t k = 0; k < stats; ++k) out[k].merge(s[k]);
  return out;
}

}  // namespace

std::vector<Moments1> sharded_serial(std::size_t total, std::size_t stats, std::uint64_t seed,
                                     const ShardFn& fn) {
  std::vector<std::vector<Moments1>> per(kShards, std::vector<Moments1>(stats));
  for (std::size_t s = 0; s < kShards; ++s) fn(shard_seed(seed, s), shard_count(total, s), per[s]);
  return combine(per, stats);
}

std::vector<Moments1> sharded_parallel(std::size_t total, std::size_t stats, std::uint64_t seed,
                                       const ShardFn& fn) {
  std::vector<std::vector<Moments1>> per(kShards, std::vector<Moments1>(stats));
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(kShards); ++s) {
    const auto u = static_cast<std::size_t>(s);
    fn(shard_seed(seed, u), shard_count(total, u), per[u]);
  }
  return combine(per, stats);
}

double trapezoid_serial(const std::function<double(double)>& f, double lo, double hi, std::size_t nodes) {
  check_nodes(nodes);
  const double h = (hi - lo) / static_cast<double>(nodes - 1);
  std::vector<double> v(nodes);
  for (std::size_t i = 0; i < nodes; ++i) v[i] = f(lo + h * static_cast<double>(i));
  double s = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < nodes; ++i) s += v[i];
  return s * h;
}

double trapezoid_parallel(const std::function<double(double)>& f, double lo, double hi, std::size_t nodes) {
  check_nodes(nodes);
  const double h = (hi - lo) / static_cast<double>(nodes - 1);
  std::vector<double> v(nodes);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(nodes); ++i)
    v[static_cast<std::size_t>(i)] = f(lo + h * static_cast<double>(i));
  double s = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < nodes; ++i) s += v[i];
  return s * h;
}

}  // namespace cbeal::kernels
