#include "cbeal/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace cbeal {

std::size_t GeneratorConfig::noise_features() const {
  return static_cast<std::size_t>(std::floor(sp * static_cast<double>(p)));
}

std::size_t GeneratorConfig::informative_features() const { return p - noise_features(); }

std::size_t GeneratorConfig::positive_count() const {
  return static_cast<std::size_t>(std::llround(pc * static_cast<double>(n)));
}

std::size_t GeneratorConfig::flip_count() const {
  return static_cast<std::size_t>(std::floor(ds * static_cast<double>(n)));
}

void GeneratorConfig::validate() const {
  if (n == 0) throw ConfigError("n must be positive");
  if (!(pc > 0.0 && pc < 1.0)) throw ConfigError("pc must be in (0,1)");
  if (!(ds >= 0.0 && ds < 1.0)) throw ConfigError("ds must be in [0,1)");
  if (!(sp >= 0.0 && sp < 1.0)) throw ConfigError("sp must be in [0,1)");
  if (!(class_sep > 0.0)) throw ConfigError("class_sep must be positive");
  if (informative_features() < 2) throw ConfigError("need at least 2 informative features");
  if (test_size % 2 != 0) throw ConfigError("test_size must be even");
}

namespace {

using Matrix = std::vector<Features>;  // row-major, square

struct Cluster {
  Features centroid;
  Matrix mixing;
  Label label;
};

std::vector<Cluster> make_clusters(std::size_t q, double sep, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::set<std::vector<bool>> chosen;
  while (chosen.size() < 4) {
    std::vector<bool> v(q);
    for (std::size_t k = 0; k < q; ++k) v[k] = coin(rng);
    chosen.insert(v);
  }
  // std::set orders vertices lexicographically (binary order); classes alternate along it.
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  std::vector<Cluster> clusters;
  std::size_t k = 0;
  for (const auto& v : chosen) {
    Cluster c;
    c.centroid.resize(q);
    for (std::size_t d = 0; d < q; ++d) c.centroid[d] = v[d] ? sep : -sep;
    c.label = k % 2 == 0 ? Label::kNegative : Label::kPositive;
    ++k;
    clusters.push_back(std::move(c));
  }
  for (auto& c : clusters) {
    c.mixing.assign(q, Features(q));
    for (auto& row : c.mixing)
      for (double& v : row) v = entry(rng);
  }
  return clusters;
}

Features draw_point(const Cluster& c, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t q = c.centroid.size();
  Features z(q);
  for (double& v : z) v = gauss(rng);
  Features x = c.centroid;
  for (std::size_t j = 0; j < q; ++j)
    for (std::size_t i = 0; i < q; ++i) x[j] += z[i] * c.mixing[i][j];
  return x;
}

// Points for one class, split across its two clusters, remainder to the first.
void draw_class(const std::vector<Cluster>& clusters, Label y, std::size_t count,
                std::mt19937_64& rng, std::vector<Sample>& out) {
  std::vector<const Cluster*> mine;
  for (const auto& c : clusters)
    if (c.label == y) mine.push_back(&c);
  const std::size_t first = count - count / 2;
  for (std::size_t i = 0; i < count; ++i) {
    const Cluster& c = *mine[i < first ? 0 : 1];
    out.push_back(Sample{draw_point(c, rng), y, 0});
  }
}

}  // namespace

Dataset generate(const GeneratorConfig& config, GeneratorReport* report) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  const std::size_t q = config.informative_features();
  const auto clusters = make_clusters(q, config.class_sep, rng);

  std::vector<Sample> train;
  const std::size_t pos = config.positive_count();
  draw_class(clusters, Label::kPositive, pos, rng, train);
  draw_class(clusters, Label::kNegative, config.n - pos, rng, train);

  std::vector<Sample> holdout;
  draw_class(clusters, Label::kPositive, config.test_size / 2, rng, holdout);
  draw_class(clusters, Label::kNegative, config.test_size / 2, rng, holdout);

  std::vector<std::size_t> idx(train.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::size_t> flipped(idx.begin(), idx.begin() + config.flip_count());
  for (std::size_t i : flipped)
    train[i].label = *train[i].label == Label::kPositive ? Label::kNegative : Label::kPositive;

  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t noise = config.noise_features();
  for (auto* rows : {&train, &holdout})
    for (auto& s : *rows)
      for (std::size_t k = 0; k < noise; ++k) s.features.push_back(gauss(rng));

  // Shuffle rows; flipped indices are reported in the shuffled order.
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> where(train.size());
  Dataset data;
  data.dimension = config.p;
  data.samples.reserve(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    where[order[i]] = i;
    data.samples.push_back(std::move(train[order[i]]));
    data.samples.back().time_index = i;
  }
  std::shuffle(holdout.begin(), holdout.end(), rng);
  data.holdout = std::move(holdout);

  if (report) {
    report->centroids.clear();
    report->cluster_labels.clear();
    for (const auto& c : clusters) {
      report->centroids.push_back(c.centroid);
      report->cluster_labels.push_back(c.label);
    }
    report->positives_before_flip = pos;
    report->flipped.clear();
    for (std::size_t i : flipped) report->flipped.push_back(where[i]);
    std::sort(report->flipped.begin(), report->flipped.end());
  }
  return data;
}

std::size_t budget_for(std::size_t stream_size, double fraction) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(stream_size)));
}

ScenarioSplit split(const Dataset& data, std::size_t initial_size, std::size_t test_per_class,
                    double budget_fraction) {
  ScenarioSplit out;
  std::vector<Sample> rest;

  if (!data.holdout.empty()) {
    out.test = data.holdout;
    std::size_t pos = 0;
    for (const auto& s : out.test) pos += *s.label == Label::kPositive;
    if (pos * 2 != out.test.size()) throw DomainError("holdout is not class balanced");
    rest = data.samples;
  } else {
    std::size_t taken[2] = {0, 0};
    for (const auto& s : data.samples) {
      if (!s.label) throw DomainError("split requires labeled rows");
      auto& c = taken[to_int(*s.label)];
      if (c < test_per_class) {
        ++c;
        out.test.push_back(s);
      } else {
        rest.push_back(s);
      }
    }
    if (taken[0] < test_per_class || taken[1] < test_per_class)
      throw DomainError("not enough rows of each class for a balanced test set");
  }
  if (rest.size() <= initial_size) throw DomainError("not enough rows for the initial pool and stream");

  // Stratify: if the first rows are single-class, pull in the earliest row
  // of the other class.
  std::vector<Sample> initial(rest.begin(), rest.begin() + initial_size);
  std::vector<Sample> stream(rest.begin() + initial_size, rest.end());
  const auto has = [&](Label y) {
    return std::any_of(initial.begin(), initial.end(), [y](const Sample& s) { return *s.label == y; });
  };
  for (Label y : {Label::kNegative, Label::kPositive}) {
    if (has(y)) continue;
    auto it = std::find_if(stream.begin(), stream.end(), [y](const Sample& s) { return *s.label == y; });
    if (it == stream.end()) continue;
    std::swap(initial.back(), *it);
  }

  for (auto& s : initial) out.initial.add(s.features, *s.label);
  out.stream = std::move(stream);
  out.budget = budget_for(out.stream.size(), budget_fraction);
  return out;
}

}  // namespace cbeal
