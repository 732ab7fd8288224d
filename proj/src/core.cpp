#include "cbeal/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cbeal {

Label label_from_int(int v) {
  if (v == 0) return Label::kNegative;
  if (v == 1) return Label::kPositive;
  throw DomainError("label must be 0 or 1, got " + std::to_string(v));
}

LabeledPool::LabeledPool(std::vector<LabeledExample> entries) {
  for (auto& e : entries) add(std::move(e.features), e.label);
}

void LabeledPool::add(Features x, Label y) {
  if (!entries_.empty() && x.size() != entries_.front().features.size())
    throw DimensionError("pool feature length mismatch");
  if (!all_finite(x)) throw DomainError("non-finite feature in pool");
  entries_.push_back({std::move(x), y});
}

std::size_t LabeledPool::dimension() const {
  return entries_.empty() ? 0 : entries_.front().features.size();
}

std::size_t LabeledPool::count(Label y) const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(), [y](const auto& e) { return e.label == y; }));
}

bool all_finite(FeatureView x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

double squared_euclidean(FeatureView x, FeatureView y) {
  if (x.size() != y.size())
    throw DimensionError("length mismatch: " + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()));
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    s += d * d;
  }
  return s;
}

double euclidean(FeatureView x, FeatureView y) { return std::sqrt(squared_euclidean(x, y)); }

SlidingWindow::SlidingWindow(std::size_t capacity)
    : capacity_(capacity),
      points_(capacity),
      pair_dist_(capacity * capacity, 0.0),
      max_dist_(capacity, 0.0),
      min_dist_(capacity, std::numeric_limits<double>::infinity()) {
  if (capacity == 0) throw DomainError("window capacity must be positive");
}

FeatureView SlidingWindow::point(std::size_t i) const { return points_[slot(i)]; }
double SlidingWindow::max_dist(std::size_t i) const { return max_dist_[slot(i)]; }
double SlidingWindow::min_dist(std::size_t i) const { return min_dist_[slot(i)]; }

void SlidingWindow::recompute(std::size_t s) {
  double hi = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size_; ++i) {
    const std::size_t o = slot(i);
    if (o == s) continue;
    hi = std::max(hi, pair(s, o));
    lo = std::min(lo, pair(s, o));
  }
  max_dist_[s] = hi;
  min_dist_[s] = lo;
}

void SlidingWindow::push(FeatureView x) {
  if (size_ == 0 && dim_ == 0) {
    dim_ = x.size();
  } else if (x.size() != dim_) {
    throw DimensionError("window point length mismatch");
  }

  if (size_ == capacity_) {
    // Evict the oldest; only members whose extreme was attained at the
    // evicted point need a rescan.
    const std::size_t gone = head_;
    head_ = (head_ + 1) % capacity_;
    --size_;
    for (std::size_t i = 0; i < size_; ++i) {
      const std::size_t s = slot(i);
      const double d = pair(s, gone);
      if (d >= max_dist_[s] || d <= min_dist_[s]) recompute(s);
    }
  }

  const std::size_t s = (head_ + size_) % capacity_;
  points_[s].assign(x.begin(), x.end());
  double hi = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size_; ++i) {
    const std::size_t o = slot(i);
    const double d = euclidean(points_[s], points_[o]);
    pair(s, o) = d;
    pair(o, s) = d;
    max_dist_[o] = std::max(max_dist_[o], d);
    min_dist_[o] = std::min(min_dist_[o], d);
    hi = std::max(hi, d);
    lo = std::min(lo, d);
  }
  max_dist_[s] = hi;
  min_dist_[s] = lo;
  ++size_;
}

double SlidingWindow::max_min_dist() const {
  if (size_ < 2) return 0.0;
  double best = 0.0;
  for (std::size_t i = 0; i < size_; ++i) best = std::max(best, min_dist(i));
  return best;
}

double SlidingWindow::min_dist_to(FeatureView x) const {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size_; ++i) lo = std::min(lo, euclidean(x, point(i)));
  return lo;
}

}  // namespace cbeal
