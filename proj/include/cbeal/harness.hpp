#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cbeal/agents.hpp"
#include "cbeal/datagen.hpp"
#include "cbeal/ensemble.hpp"

namespace cbeal {

// Default hyperparameters of one roster agent.
struct AgentSpec {
  enum class Kind { kLd, kSpf, kRal } kind;
  std::size_t window = 0;
  double sparsity = 0.0;
  double theta = 0.0;
  double eta = 0.0;
};

struct ExperimentConfig {
  std::string strategy = "cbeal-6";
  std::map<std::string, AgentSpec> roster;   // ld1, ral1, ld2, ral2, spf1, ral3

  GeneratorConfig generator{};
  std::optional<std::filesystem::path> dataset;   // CSV stream instead of the generator
  std::string label_column = "label";
  std::size_t initial_size = 20;

  double budget_fraction = 0.10;
  std::size_t eval_period = 25;
  double epsilon = 0.01;            // applied to RAL agents
  double us_threshold = 0.7;
  bool timing = true;

  SolverConfig solver{};
  FitConfig fit{};
  RewardSpec rewards{};

  ExperimentConfig();
  void validate() const;
};

// Flat key=value text; '#' starts a comment. Unknown keys are an error.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::vector<std::string> config_keys();

// Agent roster for a strategy name (cbeal-2/4/6, ld1, ld2, spf1, ral1..3, us, rs).
std::vector<Agent> build_agents(const ExperimentConfig& config, std::size_t budget,
                                std::size_t stream_size);

struct Evaluation {
  std::size_t t = 0;
  double accuracy = 0.0;
};

struct RunSummary {
  std::string strategy;
  std::uint64_t seed = 0;
  double initial_accuracy = 0.0;
  double final_accuracy = 0.0;
  std::size_t acquired = 0;
  double positive_fraction = 0.0;   // share of acquired labels that are positive
  double cumulative_reward = 0.0;
  double mean_step_seconds = 0.0;
};

struct RunMetrics {
  std::vector<std::string> agent_names;
  std::vector<StepRecord> steps;
  std::vector<Evaluation> evaluations;
  RunSummary summary;
};

double accuracy(const LogisticModel& model, const std::vector<Sample>& test);

RunMetrics run_experiment(const ExperimentConfig& config, std::uint64_t seed);

// Runs a prepared split; shared by the simulation and CSV paths.
RunMetrics run_split(const ExperimentConfig& config, const ScenarioSplit& split, std::uint64_t seed);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanSe mean_se(const std::vector<double>& values);

struct SummaryRow {
  std::string strategy;
  std::size_t runs = 0;
  MeanSe final_accuracy, initial_accuracy, acquired, positive_fraction, cumulative_reward;
};

SummaryRow summarize(const std::string& strategy, const std::vector<RunSummary>& runs);

// One row per config; runs are independent and execute concurrently.
std::vector<SummaryRow> run_replications(const std::vector<ExperimentConfig>& configs,
                                         const std::vector<std::uint64_t>& seeds,
                                         std::vector<std::vector<RunMetrics>>* runs = nullptr);

Dataset load_csv_stream(const std::filesystem::path& path, const std::string& label_column = "label");
Dataset parse_csv_stream(const std::string& text, const std::string& label_column = "label");
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);

struct CaseStudySplit {
  std::vector<Sample> train;
  std::vector<Sample> test;
  std::size_t start = 0;
};
// Contiguous, wrapping test block of size/3 rows starting at `start`.
CaseStudySplit case_study_split_at(const Dataset& data, std::size_t start);
CaseStudySplit case_study_split(const Dataset& data, std::uint64_t seed);

// Writes metrics.csv, trajectory.csv and summary.json into dir.
void export_results(const RunMetrics& metrics, const std::filesystem::path& dir);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path);

// Number formatting shared by all writers: shortest round-trip decimal.
std::string format_double(double v);

}  // namespace cbeal
