#pragma once

// Data-parallel inner loops. Each kernel has a serial reference and an
// OpenMP version that partitions work into fixed shards and combines shard
// results in shard order, so both return bit-identical values regardless
// of the thread count.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cbeal::kernels {

inline constexpr std::size_t kShards = 64;

std::uint64_t shard_seed(std::uint64_t seed, std::size_t shard);

struct Moments1 {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++count;
  }
  void merge(const Moments1& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    count += o.count;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  // Standard error of the mean.
  double se() const;
};

// Runs `draw(rng_seed, count, out)` per shard, where `out` accumulates one
// or more statistics. Shard sizes split `total` as evenly as possible.
using ShardFn = std::function<void(std::uint64_t seed, std::size_t count, std::span<Moments1> out)>;
std::vector<Moments1> sharded_serial(std::size_t total, std::size_t stats, std::uint64_t seed,
                                     const ShardFn& fn);
std::vector<Moments1> sharded_parallel(std::size_t total, std::size_t stats, std::uint64_t seed,
                                       const ShardFn& fn);

// Trapezoid rule on a uniform grid over [lo, hi].
double trapezoid_serial(const std::function<double(double)>& f, double lo, double hi, std::size_t nodes);
double trapezoid_parallel(const std::function<double(double)>& f, double lo, double hi, std::size_t nodes);

}  // namespace cbeal::kernels
