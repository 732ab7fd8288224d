#include "cbeal/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace cbeal {

namespace fs = std::filesystem;

ExperimentConfig::ExperimentConfig() {
  using K = AgentSpec::Kind;
  roster["ld1"] = {K::kLd, 100, 0.01, 0.0, 0.0};
  roster["ral1"] = {K::kRal, 0, 0.0, 0.95, 0.005};
  roster["ld2"] = {K::kLd, 150, 0.005, 0.0, 0.0};
  roster["ral2"] = {K::kRal, 0, 0.0, 0.95, 0.01};
  roster["spf1"] = {K::kSpf, 60, 0.0, 0.0, 0.0};
  roster["ral3"] = {K::kRal, 0, 0.0, 0.90, 0.01};
}

namespace {

const std::map<std::string, std::vector<std::string>>& ensembles() {
  static const std::map<std::string, std::vector<std::string>> m{
      {"cbeal-2", {"ld1", "ral1"}},
      {"cbeal-4", {"ld1", "ral1", "ld2", "ral2"}},
      {"cbeal-6", {"ld1", "ral1", "ld2", "ral2", "spf1", "ral3"}},
  };
  return m;
}

bool is_known_strategy(const std::string& s, const ExperimentConfig& c) {
  return ensembles().count(s) || c.roster.count(s) || s == "us" || s == "rs";
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!is_known_strategy(strategy, *this)) throw ConfigError("unknown strategy '" + strategy + "'");
  if (!(budget_fraction > 0.0 && budget_fraction <= 1.0))
    throw ConfigError("budget_fraction must be in (0,1]");
  if (eval_period == 0) throw ConfigError("eval_period must be positive");
  if (initial_size == 0) throw ConfigError("initial_size must be positive");
  for (const auto& [name, a] : roster) {
    if (a.kind != AgentSpec::Kind::kRal && a.window == 0) throw ConfigError(name + ": window must be positive");
    if (a.kind == AgentSpec::Kind::kRal && !(a.theta > 0.0 && a.theta <= 1.0))
      throw ConfigError(name + ": theta must be in (0,1]");
  }
  rewards.validate();
  if (!dataset) generator.validate();
}

// ---------------------------------------------------------------- config

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

std::map<std::string, Setter> setters() {
  std::map<std::string, Setter> s;
  auto num = [](auto member) {
    return [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.*member = to_double(k, v);
    };
  };
  s["strategy"] = [](auto& c, auto&, auto& v) { c.strategy = v; };
  s["n"] = [](auto& c, auto& k, auto& v) { c.generator.n = to_size(k, v); };
  s["p"] = [](auto& c, auto& k, auto& v) { c.generator.p = to_size(k, v); };
  s["pc"] = [](auto& c, auto& k, auto& v) { c.generator.pc = to_double(k, v); };
  s["ds"] = [](auto& c, auto& k, auto& v) { c.generator.ds = to_double(k, v); };
  s["sp"] = [](auto& c, auto& k, auto& v) { c.generator.sp = to_double(k, v); };
  s["class_sep"] = [](auto& c, auto& k, auto& v) { c.generator.class_sep = to_double(k, v); };
  s["test_size"] = [](auto& c, auto& k, auto& v) { c.generator.test_size = to_size(k, v); };
  s["dataset"] = [](auto& c, auto&, auto& v) { c.dataset = fs::path(v); };
  s["label_column"] = [](auto& c, auto&, auto& v) { c.label_column = v; };
  s["initial_size"] = [](auto& c, auto& k, auto& v) { c.initial_size = to_size(k, v); };
  s["budget_fraction"] = num(&ExperimentConfig::budget_fraction);
  s["eval_period"] = [](auto& c, auto& k, auto& v) { c.eval_period = to_size(k, v); };
  s["epsilon"] = num(&ExperimentConfig::epsilon);
  s["us_threshold"] = num(&ExperimentConfig::us_threshold);
  s["timing"] = [](auto& c, auto& k, auto& v) { c.timing = to_bool(k, v); };
  s["horizon"] = [](auto& c, auto& k, auto& v) { c.solver.horizon = to_size(k, v); };
  s["p_min"] = [](auto& c, auto& k, auto& v) {
    c.solver.p_min = v == "auto" ? -1.0 : to_double(k, v);
  };
  s["delta"] = [](auto& c, auto& k, auto& v) { c.solver.delta = to_double(k, v); };
  s["lambda"] = [](auto& c, auto& k, auto& v) { c.solver.lambda = to_double(k, v); };
  s["h"] = [](auto& c, auto& k, auto& v) { c.solver.h = to_double(k, v); };
  s["gamma"] = [](auto& c, auto& k, auto& v) {
    if (v == "t/T") {
      c.solver.gamma_grows = true;
    } else {
      c.solver.gamma_grows = false;
      c.solver.gamma_constant = to_double(k, v);
    }
  };
  s["warmup"] = [](auto& c, auto& k, auto& v) { c.solver.warmup = to_size(k, v); };
  s["monitoring"] = [](auto& c, auto& k, auto& v) { c.solver.monitoring = to_bool(k, v); };
  s["reward"] = [](auto& c, auto& k, auto& v) { c.rewards.reward = to_double(k, v); };
  s["penalty"] = [](auto& c, auto& k, auto& v) { c.rewards.penalty = to_double(k, v); };
  s["regularization"] = [](auto& c, auto& k, auto& v) {
    if (v == "none") c.fit.regularization.penalty = Penalty::kNone;
    else if (v == "l1") c.fit.regularization.penalty = Penalty::kL1;
    else if (v == "l2") c.fit.regularization.penalty = Penalty::kL2;
    else throw ConfigError(k + ": expected none, l1 or l2");
  };
  s["reg_strength"] = [](auto& c, auto& k, auto& v) { c.fit.regularization.strength = to_double(k, v); };
  s["fit_iterations"] = [](auto& c, auto& k, auto& v) { c.fit.max_iterations = to_size(k, v); };
  s["fit_step_scale"] = [](auto& c, auto& k, auto& v) { c.fit.step_scale = to_double(k, v); };
  s["fit_tolerance"] = [](auto& c, auto& k, auto& v) { c.fit.gradient_tolerance = to_double(k, v); };

  for (std::string a : {"ld1", "ld2"}) {
    s[a + "_window"] = [a](auto& c, auto& k, auto& v) { c.roster[a].window = to_size(k, v); };
    s[a + "_sparsity"] = [a](auto& c, auto& k, auto& v) { c.roster[a].sparsity = to_double(k, v); };
  }
  s["spf1_window"] = [](auto& c, auto& k, auto& v) { c.roster["spf1"].window = to_size(k, v); };
  for (std::string a : {"ral1", "ral2", "ral3"}) {
    s[a + "_theta"] = [a](auto& c, auto& k, auto& v) { c.roster[a].theta = to_double(k, v); };
    s[a + "_eta"] = [a](auto& c, auto& k, auto& v) { c.roster[a].eta = to_double(k, v); };
  }
  return s;
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

ExperimentConfig parse_config(const std::string& text) {
  const auto table = setters();
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = table.find(key);
    if (it == table.end())
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second(config, key, value);
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------- agents

namespace {

Agent make_agent(const std::string& name, const AgentSpec& spec, const ExperimentConfig& c) {
  switch (spec.kind) {
    case AgentSpec::Kind::kLd:
      return Agent(name, LdAgentState(spec.window, spec.sparsity));
    case AgentSpec::Kind::kSpf:
      return Agent(name, SpfAgentState(spec.window));
    case AgentSpec::Kind::kRal:
      return Agent(name, RalAgentState{spec.theta, spec.eta, c.rewards}, c.epsilon);
  }
  throw ConfigError("bad agent kind");
}

}  // namespace

std::vector<Agent> build_agents(const ExperimentConfig& c, std::size_t budget, std::size_t stream_size) {
  std::vector<Agent> agents;
  if (auto it = ensembles().find(c.strategy); it != ensembles().end()) {
    for (const auto& name : it->second) agents.push_back(make_agent(name, c.roster.at(name), c));
  } else if (auto r = c.roster.find(c.strategy); r != c.roster.end()) {
    agents.push_back(make_agent(r->first, r->second, c));
  } else if (c.strategy == "us") {
    agents.emplace_back("us", UncertaintyAgent{c.us_threshold});
  } else if (c.strategy == "rs") {
    agents.emplace_back("rs", RandomAgent{rs_propose(budget, stream_size)});
  } else {
    throw ConfigError("unknown strategy '" + c.strategy + "'");
  }
  return agents;
}

// ---------------------------------------------------------------- runs

double accuracy(const LogisticModel& model, const std::vector<Sample>& test) {
  if (test.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& s : test) hit += predict(model, s.features) == *s.label;
  return static_cast<double>(hit) / static_cast<double>(test.size());
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RunMetrics run_split(const ExperimentConfig& config, const ScenarioSplit& sp, std::uint64_t seed) {
  ControllerConfig cc;
  cc.solver = config.solver;
  cc.fit = config.fit;
  cc.rewards = config.rewards;
  cc.budget = sp.budget;
  Controller controller(build_agents(config, sp.budget, sp.stream.size()), cc, sp.initial,
                        splitmix64(seed));

  RunMetrics m;
  for (const auto& a : controller.agents()) m.agent_names.push_back(a.name());
  m.summary.strategy = config.strategy;
  m.summary.seed = seed;
  m.summary.initial_accuracy = accuracy(controller.model(), sp.test);

  const Oracle oracle = [](const Sample& s) -> Label {
    if (!s.label) throw DomainError("oracle has no label for sample " + std::to_string(s.time_index));
    return *s.label;
  };

  double seconds = 0.0;
  std::size_t positives = 0;
  for (const auto& x : sp.stream) {
    const auto start = std::chrono::steady_clock::now();
    StepRecord rec = controller.step(x, oracle);
    seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (rec.action == Action::kAcquire) {
      positives += *x.label == Label::kPositive;
      m.summary.cumulative_reward += rec.reward;
    }
    if (rec.t % config.eval_period == 0 || rec.t == sp.stream.size())
      m.evaluations.push_back({rec.t, accuracy(controller.model(), sp.test)});
    m.steps.push_back(std::move(rec));
  }

  m.summary.final_accuracy = m.evaluations.empty() ? m.summary.initial_accuracy
                                                   : m.evaluations.back().accuracy;
  m.summary.acquired = controller.budget_used();
  m.summary.positive_fraction =
      m.summary.acquired ? static_cast<double>(positives) / static_cast<double>(m.summary.acquired) : 0.0;
  if (config.timing && !sp.stream.empty())
    m.summary.mean_step_seconds = seconds / static_cast<double>(sp.stream.size());
  return m;
}

RunMetrics run_experiment(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  ScenarioSplit sp;
  if (config.dataset) {
    const Dataset data = load_csv_stream(*config.dataset, config.label_column);
    CaseStudySplit cs = case_study_split(data, seed);
    if (cs.train.size() <= config.initial_size) throw DomainError("training block too small");
    for (std::size_t i = 0; i < config.initial_size; ++i)
      sp.initial.add(cs.train[i].features, *cs.train[i].label);
    sp.stream.assign(cs.train.begin() + static_cast<std::ptrdiff_t>(config.initial_size), cs.train.end());
    sp.test = std::move(cs.test);
    sp.budget = budget_for(sp.stream.size(), config.budget_fraction);
  } else {
    GeneratorConfig g = config.generator;
    g.seed = seed;
    sp = split(generate(g), config.initial_size, g.test_size / 2, config.budget_fraction);
  }
  return run_split(config, sp, seed);
}

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe out;
  if (v.empty()) return out;
  double sum = 0.0;
  for (double x : v) sum += x;
  out.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
  }
  return out;
}

SummaryRow summarize(const std::string& strategy, const std::vector<RunSummary>& runs) {
  SummaryRow row;
  row.strategy = strategy;
  row.runs = runs.size();
  auto col = [&](auto get) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(get(r));
    return mean_se(v);
  };
  row.final_accuracy = col([](const RunSummary& r) { return r.final_accuracy; });
  row.initial_accuracy = col([](const RunSummary& r) { return r.initial_accuracy; });
  row.acquired = col([](const RunSummary& r) { return static_cast<double>(r.acquired); });
  row.positive_fraction = col([](const RunSummary& r) { return r.positive_fraction; });
  row.cumulative_reward = col([](const RunSummary& r) { return r.cumulative_reward; });
  return row;
}

std::vector<SummaryRow> run_replications(const std::vector<ExperimentConfig>& configs,
                                         const std::vector<std::uint64_t>& seeds,
                                         std::vector<std::vector<RunMetrics>>* runs) {
  if (seeds.size() < 2) throw ConfigError("replications need at least two seeds");
  const std::size_t nc = configs.size();
  const std::size_t ns = seeds.size();
  std::vector<RunMetrics> all(nc * ns);
  std::vector<std::string> errors(nc * ns);

  const auto total = static_cast<std::ptrdiff_t>(nc * ns);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < total; ++k) {
    const auto c = static_cast<std::size_t>(k) / ns;
    const auto s = static_cast<std::size_t>(k) % ns;
    try {
      all[static_cast<std::size_t>(k)] = run_experiment(configs[c], seeds[s]);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(k)] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw Error(e);

  std::vector<SummaryRow> rows;
  if (runs) runs->assign(nc, {});
  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<RunSummary> sums;
    for (std::size_t s = 0; s < ns; ++s) sums.push_back(all[c * ns + s].summary);
    rows.push_back(summarize(configs[c].strategy, sums));
    if (runs)
      for (std::size_t s = 0; s < ns; ++s) (*runs)[c].push_back(std::move(all[c * ns + s]));
  }
  return rows;
}

// ---------------------------------------------------------------- CSV in

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

Dataset parse_csv_stream(const std::string& text, const std::string& label_column) {
  std::istringstream in(text);
  std::string line;
  std::size_t row = 1;
  if (!std::getline(in, line)) throw ParseError("missing header", row);
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_row(trim(line));
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) throw ParseError("no column named '" + label_column + "'", row);
  const auto label_idx = static_cast<std::size_t>(label_it - header.begin());

  Dataset data;
  data.dimension = header.size() - 1;
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split_row(line);
    if (cells.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " cells, got " +
                           std::to_string(cells.size()), row);
    Sample s;
    s.time_index = data.samples.size();
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto& c = cells[k];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (c.empty() || ec != std::errc() || ptr != c.data() + c.size() || !std::isfinite(v))
        throw ParseError("non-numeric value '" + c + "' in column '" + header[k] + "'", row);
      if (k == label_idx) {
        if (v != 0.0 && v != 1.0) throw ParseError("label must be 0 or 1, got '" + c + "'", row);
        s.label = v == 1.0 ? Label::kPositive : Label::kNegative;
      } else {
        s.features.push_back(v);
      }
    }
    data.samples.push_back(std::move(s));
  }
  return data;
}

Dataset load_csv_stream(const fs::path& path, const std::string& label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv_stream(ss.str(), label_column);
}

CaseStudySplit case_study_split_at(const Dataset& data, std::size_t start) {
  const std::size_t n = data.samples.size();
  if (n < 3) throw DomainError("case-study split needs at least 3 rows");
  if (start >= n) throw DomainError("split start out of range");
  const std::size_t block = n / 3;
  std::vector<bool> in_test(n, false);
  CaseStudySplit out;
  out.start = start;
  for (std::size_t k = 0; k < block; ++k) {
    const std::size_t i = (start + k) % n;
    in_test[i] = true;
    out.test.push_back(data.samples[i]);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!in_test[i]) out.train.push_back(data.samples[i]);
  return out;
}

CaseStudySplit case_study_split(const Dataset& data, std::uint64_t seed) {
  if (data.samples.size() < 30) throw DomainError("case-study split needs at least 30 rows");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, data.samples.size() - 1);
  return case_study_split_at(data, pick(rng));
}

// ---------------------------------------------------------------- output

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

namespace {

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error("cannot replace " + path.string() + ": " + ec.message());
}

}  // namespace

void write_dataset_csv(const Dataset& data, const fs::path& path) {
  std::ostringstream out;
  for (std::size_t k = 0; k < data.dimension; ++k) out << 'f' << (k + 1) << ',';
  out << "label\n";
  for (const auto& s : data.samples) {
    for (double v : s.features) out << format_double(v) << ',';
    out << (s.label ? to_int(*s.label) : 0) << '\n';
  }
  write_atomic(path, out.str());
}

void export_results(const RunMetrics& m, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());

  std::map<std::size_t, double> acc;
  for (const auto& e : m.evaluations) acc[e.t] = e.accuracy;

  std::ostringstream metrics;
  metrics << "t,action,reward,budget_used,test_accuracy\n";
  for (const auto& r : m.steps) {
    metrics << r.t << ',' << static_cast<int>(r.action) << ',' << format_double(r.reward) << ','
            << r.budget_used << ',';
    if (auto it = acc.find(r.t); it != acc.end()) metrics << format_double(it->second);
    metrics << '\n';
  }
  write_atomic(dir / "metrics.csv", metrics.str());

  std::ostringstream traj;
  traj << 't';
  for (std::size_t i = 0; i < m.agent_names.size(); ++i) traj << ",alpha_s_" << (i + 1);
  traj << ",flipped\n";
  for (const auto& r : m.steps) {
    traj << r.t;
    for (double w : r.standardized_weights) traj << ',' << format_double(w);
    traj << ',' << (r.flipped ? 1 : 0) << '\n';
  }
  write_atomic(dir / "trajectory.csv", traj.str());

  nlohmann::ordered_json j;
  j["strategy"] = m.summary.strategy;
  j["seed"] = m.summary.seed;
  j["final_accuracy"] = m.summary.final_accuracy;
  j["acquired"] = m.summary.acquired;
  j["positive_fraction"] = m.summary.positive_fraction;
  j["cumulative_reward"] = m.summary.cumulative_reward;
  j["mean_step_seconds"] = m.summary.mean_step_seconds;
  j["initial_accuracy"] = m.summary.initial_accuracy;
  j["agents"] = m.agent_names;
  write_atomic(dir / "summary.json", j.dump(2) + "\n");
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const fs::path& path) {
  std::ostringstream out;
  out << "strategy,runs,final_accuracy,final_accuracy_se,initial_accuracy,initial_accuracy_se,"
         "acquired,acquired_se,positive_fraction,positive_fraction_se,cumulative_reward,"
         "cumulative_reward_se\n";
  for (const auto& r : rows) {
    out << r.strategy << ',' << r.runs;
    for (const MeanSe* m : {&r.final_accuracy, &r.initial_accuracy, &r.acquired, &r.positive_fraction,
                            &r.cumulative_reward})
      out << ',' << format_double(m->mean) << ',' << format_double(m->se);
    out << '\n';
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_atomic(path, out.str());
}

}  // namespace cbeal
