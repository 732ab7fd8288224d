#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cbeal/core.hpp"

namespace cbeal {

struct GeneratorConfig {
  std::size_t n = 500;            // training rows (initial pool + stream)
  std::size_t p = 2;
  double pc = 0.1;                // positive fraction of training rows
  double ds = 0.0;                // fraction of training labels flipped
  double sp = 0.0;                // fraction of noise features
  double class_sep = 1.0;
  std::size_t test_size = 500;    // balanced holdout rows, half per class
  std::uint64_t seed = 0;

  std::size_t noise_features() const;
  std::size_t informative_features() const;
  std::size_t positive_count() const;
  std::size_t flip_count() const;
  void validate() const;
};

struct Dataset {
  std::vector<Sample> samples;   // training rows in stream order
  std::vector<Sample> holdout;   // optional pre-drawn test rows
  std::size_t dimension = 0;
};

struct GeneratorReport {
  std::vector<Features> centroids;      // informative coordinates, cluster order
  std::vector<Label> cluster_labels;    // cluster k -> class k % 2
  std::size_t positives_before_flip = 0;
  std::vector<std::size_t> flipped;     // training row indices whose label was flipped
};

// Four Gaussian clusters (two per class) centred on distinct hypercube
// vertices of the informative subspace, each mixed by its own random matrix,
// followed by label flips on training rows and appended noise columns.
Dataset generate(const GeneratorConfig& config, GeneratorReport* report = nullptr);

struct ScenarioSplit {
  LabeledPool initial;
  std::vector<Sample> stream;
  std::vector<Sample> test;
  std::size_t budget = 0;
};

std::size_t budget_for(std::size_t stream_size, double fraction);

// Balanced test set first (the holdout if present, else drawn from the rows),
// then an initial pool holding both classes when possible, then the stream.
ScenarioSplit split(const Dataset& data, std::size_t initial_size = 20,
                    std::size_t test_per_class = 250, double budget_fraction = 0.10);

}  // namespace cbeal
