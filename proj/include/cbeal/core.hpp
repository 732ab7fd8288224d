#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbeal {

// Error hierarchy. Everything thrown by the library derives from Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

using Features = std::vector<double>;
using FeatureView = std::span<const double>;

enum class Label : std::uint8_t { kNegative = 0, kPositive = 1 };

inline int to_int(Label y) { return static_cast<int>(y); }
Label label_from_int(int v);

struct Sample {
  Features features;
  std::optional<Label> label;
  std::size_t time_index = 0;
};

struct LabeledExample {
  Features features;
  Label label;
};

// Acquired (features, label) pairs in acquisition order.
class LabeledPool {
 public:
  LabeledPool() = default;
  explicit LabeledPool(std::vector<LabeledExample> entries);

  void add(Features x, Label y);
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t dimension() const;
  std::size_t count(Label y) const;
  const std::vector<LabeledExample>& entries() const { return entries_; }

 private:
  std::vector<LabeledExample> entries_;
};

bool all_finite(FeatureView x);

// Sum of squared coordinate differences.
double squared_euclidean(FeatureView x, FeatureView y);
double euclidean(FeatureView x, FeatureView y);

// Fixed-capacity FIFO window of feature vectors that keeps, for every
// member, the Euclidean distance to its farthest and nearest co-member.
// A singleton window reports a farthest distance of 0 and a nearest
// distance of +inf.
class SlidingWindow {
 public:
  explicit SlidingWindow(std::size_t capacity);

  void push(FeatureView x);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  // Members are indexed oldest (0) to newest (size()-1).
  FeatureView point(std::size_t i) const;
  double max_dist(std::size_t i) const;
  double min_dist(std::size_t i) const;

  // Largest nearest-neighbour distance among members (0 when size < 2).
  double max_min_dist() const;
  // Nearest distance from an external point to the members (+inf if empty).
  double min_dist_to(FeatureView x) const;

 private:
  std::size_t slot(std::size_t i) const { return (head_ + i) % capacity_; }
  double& pair(std::size_t a, std::size_t b) { return pair_dist_[a * capacity_ + b]; }
  double pair(std::size_t a, std::size_t b) const { return pair_dist_[a * capacity_ + b]; }
  void recompute(std::size_t s);

  std::size_t capacity_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  std::size_t dim_ = 0;
  std::vector<Features> points_;     // by slot
  std::vector<double> pair_dist_;    // capacity x capacity, by slot
  std::vector<double> max_dist_;     // by slot
  std::vector<double> min_dist_;     // by slot
};

}  // namespace cbeal
