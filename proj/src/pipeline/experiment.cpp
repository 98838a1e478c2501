// Copyright 2026 The infotraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "infotraj/pipeline/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>

#include "infotraj/csv.hpp"
#include "infotraj/gp/hyperparameters.hpp"
#include "infotraj/gp/io.hpp"
#include "infotraj/gp/kmedoids.hpp"
#include "infotraj/pipeline/statistics.hpp"
#include "infotraj/trajgen/deviation.hpp"

namespace infotraj::pipeline {

namespace {

constexpr std::uint64_t kPriorTag = 0x7072696f;
constexpr std::uint64_t kNoiseTag = 0x6e6f6973;
constexpr std::uint64_t kUpdateTag = 0x75706474;
constexpr std::uint64_t kSelectTag = 0x73656c65;
constexpr std::uint64_t kMedoidTag = 0x6d65646f;
constexpr std::uint64_t kFitTag = 0x6669746b;
constexpr std::uint64_t kCorrelateTag = 0x636f7272;
constexpr std::uint64_t kTestTag = 0x74657374;

constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string axis_name(int i) {
  static const char* names[] = {"x", "y", "z"};
  return i < 3 ? names[i] : std::to_string(i);
}

std::string seed_dir(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

simulate::RolloutConfig experiment_config(const ExperimentConfig& config, const SeedSetup& setup,
                                          std::uint64_t seed, std::int64_t trajectory_id) {
  simulate::RolloutConfig rc;
  rc.mode = simulate::Mode::kExperiment;
  rc.seed = seed;
  rc.observation_noise = config.observation_noise * setup.plant.residual_scale();
  rc.trajectory_id = trajectory_id;
  return rc;
}

ComparisonRow make_row(const std::string& arm, int iteration, int budget, std::uint64_t seed,
                       const simulate::TrackingMetrics& m) {
  ComparisonRow row;
  row.arm = arm;
  row.iteration = iteration;
  row.budget = budget;
  row.seed = seed;
  row.err_sq = m.squared;
  row.err_abs = m.absolute;
  row.diverged = m.diverged;
  return row;
}

void save_iteration(const IterationRecord& rec, const SeedSetup& setup, const std::string& dir) {
  const double T = setup.plant.sampling_time();
  if (rec.selection) {
    write_text(dir + "/selection.csv", rec.selection->report_csv());
    write_text(dir + "/region.csv", rec.selection->region.to_csv());
  }
  if (rec.reference.size() > 0) write_text(dir + "/reference.csv", reference_csv(rec.reference, T));
  if (rec.executed) write_text(dir + "/executed.csv", rec.executed->to_csv());
  for (const auto& b : rec.budgets) {
    const std::string tag = "budget_" + std::to_string(b.budget);
    write_text(dir + "/evaluation_" + tag + ".csv", b.evaluation.to_csv());
    gp::save_model(b.model, dir + "/model_" + tag);
  }
  rec.metadata().save(dir + "/record.kv");
}

}  // namespace

std::string reference_csv(const MatrixXd& reference, double sampling_time) {
  std::vector<std::string> header = {"k", "t"};
  for (Eigen::Index j = 0; j < reference.cols(); ++j) header.push_back("xref_" + std::to_string(j));
  CsvWriter csv(header);
  for (Eigen::Index k = 0; k < reference.rows(); ++k) {
    csv.cell(static_cast<long long>(k));
    csv.cell(static_cast<double>(k) * sampling_time);
    for (Eigen::Index j = 0; j < reference.cols(); ++j) csv.cell(reference(k, j));
    csv.end_row();
  }
  return csv.str();
}

SeedSetup setup_seed(const ExperimentConfig& config, std::uint64_t seed) {
  SeedSetup s;
  s.seed = seed;
  s.plant = systems::builtin(config.plant, config.plant_seed.value_or(seed), config.plant_options);
  s.gains = config.gains ? *config.gains : control::default_gains(s.plant);
  require(s.gains.K.rows() == s.plant.state_dim(), "config: controller gains do not match the plant");
  s.task = trajgen::task_reference(s.plant, config.task);
  trajgen::TaskOptions eval = config.task;
  eval.scale = config.task.scale * config.eval_scale;
  s.eval_task = trajgen::task_reference(s.plant, eval);
  s.kernels = kernel_setup(config, s.plant, s.task);
  return s;
}

gp::ResidualModel empty_model(const ExperimentConfig& config, const SeedSetup& setup) {
  gp::FeatureMap features{config.features, setup.plant.state_dim(), setup.plant.input_dim()};
  return gp::ResidualModel(features, setup.kernels.init);
}

gp::ResidualModel update_model(const gp::ResidualModel& model, const simulate::RolloutResult& data,
                               int budget, const ExperimentConfig& config, const SeedSetup& setup,
                               std::uint64_t seed) {
  require(budget >= 1, "update_model: budget must be positive");
  if (data.features.rows() == 0) return model;
  const std::vector<Eigen::Index> rows =
      gp::kmedoids_rows(data.features, budget, derive_seed(seed, kMedoidTag));
  std::vector<gp::Dataset> subsets;
  for (const auto& ds : data.datasets()) subsets.push_back(ds.subset(rows));
  gp::ResidualModel updated = model.condition(subsets);
  if (!config.fit_enabled) return updated;
  gp::FitOptions fit = config.fit;
  fit.seed = derive_seed(seed, kFitTag);
  return gp::refit(updated, setup.kernels.bounds, fit);
}

simulate::RolloutResult evaluate_task(systems::SealedPlant& plant, const SeedSetup& setup,
                                      const gp::ResidualModel& model) {
  simulate::RolloutConfig rc;
  rc.mode = simulate::Mode::kEvaluation;
  return simulate::rollout(plant, setup.gains, model, setup.eval_task, rc);
}

PriorResult build_prior(systems::SealedPlant& plant, const SeedSetup& setup,
                        const ExperimentConfig& config) {
  PriorResult prior;
  const gp::ResidualModel empty = empty_model(config, setup);
  prior.rollout = simulate::rollout(plant, setup.gains, empty, setup.task,
                                    experiment_config(config, setup, derive_seed(setup.seed, kPriorTag), 0));
  prior.model = update_model(empty, prior.rollout, config.prior_budget, config, setup,
                             derive_seed(setup.seed, kPriorTag));
  prior.evaluation = evaluate_task(plant, setup, prior.model);
  prior.metrics = simulate::tracking_error(prior.evaluation);
  return prior;
}

KeyValue IterationRecord::metadata() const {
  KeyValue kv;
  kv.set("iteration", iteration);
  kv.set("arm", to_string(arm));
  kv.set("seed", std::to_string(seed));
  kv.set("trajectory_id", static_cast<std::int64_t>(trajectory_id));
  kv.set("cost", cost);
  kv.set("diverged", diverged ? "true" : "false");
  kv.set("experiment_steps", static_cast<std::int64_t>(experiment_steps));
  for (const auto& b : budgets) {
    const std::string p = "budget_" + std::to_string(b.budget) + ".";
    kv.set(p + "err_sq", b.metrics.squared);
    kv.set(p + "err_abs", b.metrics.absolute);
    kv.set(p + "model_points", static_cast<std::int64_t>(b.model.total_points()));
    kv.set(p + "model", "model_budget_" + std::to_string(b.budget));
  }
  return kv;
}

IterationRecord run_iteration(systems::SealedPlant& plant, const SeedSetup& setup,
                              const ExperimentConfig& config, const gp::ResidualModel& model,
                              Arm arm, int iteration, int jobs) {
  const auto start = Clock::now();
  IterationRecord rec;
  rec.iteration = iteration;
  rec.arm = arm;
  rec.seed = setup.seed;

  trajgen::SelectionConfig sc = config.selection;
  sc.seed = derive_seed(setup.seed, kSelectTag, static_cast<std::uint64_t>(iteration));
  sc.jobs = jobs;
  sc.sample_mode = config.sample_mode;
  if (arm == Arm::kInformative) {
    rec.selection = trajgen::select_informative(setup.plant, setup.gains, model, setup.task, sc);
    rec.reference = rec.selection->best().reference;
    rec.cost = rec.selection->best().cost;
  } else if (arm == Arm::kNonInformative) {
    rec.reference = setup.task;
    try {
      rec.selection = trajgen::evaluate_candidates(setup.plant, setup.gains, model, setup.task,
                                                   {trajgen::zero_deviation(setup.plant, sc)}, sc);
      rec.cost = rec.selection->best().cost;
    } catch (const SelectionError&) {
      rec.cost = kInf;
    }
  } else {
    rec.cost = std::numeric_limits<double>::quiet_NaN();
  }

  if (arm != Arm::kNoLearning) {
    rec.trajectory_id = iteration;
    const long long before = plant.steps(systems::Access::kExperiment);
    const std::uint64_t noise = derive_seed(setup.seed, kNoiseTag, static_cast<std::uint64_t>(iteration));
    rec.executed = simulate::rollout(plant, setup.gains, model, rec.reference,
                                     experiment_config(config, setup, noise, iteration));
    rec.experiment_steps = plant.steps(systems::Access::kExperiment) - before;
    rec.diverged = rec.executed->diverged;
  }

  const std::uint64_t update_seed =
      derive_seed(setup.seed, kUpdateTag, static_cast<std::uint64_t>(iteration));
  for (int budget : config.budgets) {
    BudgetResult b;
    b.budget = budget;
    b.model = rec.executed && !rec.diverged
                  ? update_model(model, *rec.executed, budget, config, setup, update_seed)
                  : model;
    b.evaluation = evaluate_task(plant, setup, b.model);
    b.metrics = simulate::tracking_error(b.evaluation);
    rec.budgets.push_back(std::move(b));
  }
  rec.wall_seconds = seconds_since(start);
  return rec;
}

SeedResult run_seed(const ExperimentConfig& config, std::uint64_t seed, const std::string& outdir,
                    int jobs) {
  const auto start = Clock::now();
  const SeedSetup setup = setup_seed(config, seed);
  systems::SealedPlant plant(setup.plant);
  SeedResult result;
  result.seed = seed;

  const PriorResult prior = build_prior(plant, setup, config);
  result.prior_metrics = prior.metrics;
  result.prior_steps = plant.steps(systems::Access::kExperiment);
  result.history.push_back(make_row("prior", 0, config.prior_budget, seed, prior.metrics));
  KeyValue timing;
  if (!outdir.empty()) {
    const std::string dir = outdir + "/prior/" + seed_dir(seed);
    const double T = setup.plant.sampling_time();
    write_text(dir + "/task.csv", reference_csv(setup.task, T));
    write_text(dir + "/eval_task.csv", reference_csv(setup.eval_task, T));
    write_text(dir + "/executed.csv", prior.rollout.to_csv());
    write_text(dir + "/evaluation.csv", prior.evaluation.to_csv());
    gp::save_model(prior.model, dir + "/model");
    setup.plant.to_kv().save(dir + "/plant.kv");
    KeyValue kv;
    kv.set("seed", std::to_string(seed));
    kv.set("err_sq", prior.metrics.squared);
    kv.set("err_abs", prior.metrics.absolute);
    kv.set("experiment_steps", static_cast<std::int64_t>(result.prior_steps));
    kv.save(dir + "/record.kv");
  }

  for (Arm arm : config.arms) {
    gp::ResidualModel model = prior.model;
    std::vector<IterationRecord> records;
    long long steps = 0;
    for (int it = 1; it <= config.iterations; ++it) {
      IterationRecord rec = run_iteration(plant, setup, config, model, arm, it, jobs);
      model = rec.largest().model;
      steps += rec.experiment_steps;
      for (const auto& b : rec.budgets) {
        result.history.push_back(make_row(to_string(arm), it, b.budget, seed, b.metrics));
      }
      if (!outdir.empty()) {
        save_iteration(rec, setup, outdir + "/" + to_string(arm) + "/" + std::to_string(it) + "/" +
                                       seed_dir(seed));
        timing.set(to_string(arm) + "." + std::to_string(it) + ".wall_seconds", rec.wall_seconds);
      }
      records.push_back(std::move(rec));
    }
    for (const auto& b : records.back().budgets) {
      result.rows.push_back(make_row(to_string(arm), config.iterations, b.budget, seed, b.metrics));
    }
    result.experiment_steps.push_back(steps);
    result.arms.push_back(std::move(records));
  }
  if (!outdir.empty()) {
    const int n = setup.plant.state_dim();
    timing.set("total.wall_seconds", seconds_since(start));
    timing.save(outdir + "/timing/" + seed_dir(seed) + ".kv");
    write_text(outdir + "/seeds/" + seed_dir(seed) + ".history.csv", history_csv(result.history, n));
    // Written last: its presence marks the seed as complete for --resume.
    write_text(outdir + "/seeds/" + seed_dir(seed) + ".csv", comparison_csv(result.rows, n));
  }
  return result;
}

std::vector<SummaryRow> summarize(const std::vector<ComparisonRow>& rows) {
  std::map<std::pair<std::string, int>, std::vector<const ComparisonRow*>> groups;
  std::vector<std::pair<std::string, int>> order;
  for (const auto& r : rows) {
    auto key = std::make_pair(r.arm, r.budget);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    const auto& group = groups[key];
    SummaryRow s;
    s.arm = key.first;
    s.budget = key.second;
    s.seeds = static_cast<int>(group.size());
    std::vector<double> sq;
    s.mean_err_abs = VectorXd::Zero(group.front()->err_abs.size());
    for (const auto* r : group) {
      sq.push_back(r->err_sq);
      s.mean_err_abs += r->err_abs;
    }
    s.mean_err_abs /= static_cast<double>(group.size());
    s.mean_err_sq = mean(sq);
    s.std_err_sq = stddev(sq);
    s.median_err_sq = median(sq);
    out.push_back(s);
  }
  return out;
}

std::vector<ImprovementRow> improvement(const std::vector<ComparisonRow>& rows,
                                        const std::string& arm, const std::string& baseline) {
  std::map<std::pair<int, std::uint64_t>, double> base;
  std::vector<int> budgets;
  for (const auto& r : rows) {
    if (r.arm != baseline) continue;
    base[{r.budget, r.seed}] = r.err_sq;
    if (std::find(budgets.begin(), budgets.end(), r.budget) == budgets.end()) budgets.push_back(r.budget);
  }
  std::vector<ImprovementRow> out;
  for (int budget : budgets) {
    ImprovementRow imp;
    imp.budget = budget;
    std::vector<double> percent, a_values, b_values;
    for (const auto& r : rows) {
      if (r.arm != arm || r.budget != budget) continue;
      auto it = base.find({budget, r.seed});
      if (it == base.end()) continue;
      const double a = r.err_sq;
      const double b = it->second;
      ++imp.pairs;
      if (a < b) ++imp.wins;
      percent.push_back(a == b ? 0.0 : 100.0 * (b - a) / b);
      a_values.push_back(a);
      b_values.push_back(b);
    }
    if (imp.pairs == 0) continue;
    imp.median_percent = median(percent);
    imp.percent_of_means = 100.0 * (mean(b_values) - mean(a_values)) / mean(b_values);
    out.push_back(imp);
  }
  return out;
}

namespace {

std::vector<std::string> comparison_header(int state_dim, bool history) {
  std::vector<std::string> header = {"arm"};
  if (history) header.push_back("iteration");
  header.insert(header.end(), {"budget", "seed", "err_sq"});
  for (int i = 0; i < state_dim; ++i) header.push_back("err_abs_" + axis_name(i));
  if (history) header.push_back("diverged");
  return header;
}

std::string rows_csv(const std::vector<ComparisonRow>& rows, int state_dim, bool history) {
  CsvWriter csv(comparison_header(state_dim, history));
  for (const auto& r : rows) {
    require(r.err_abs.size() == state_dim, "comparison: axis count mismatch");
    csv.cell(r.arm);
    if (history) csv.cell(r.iteration);
    csv.cell(r.budget);
    csv.cell(std::to_string(r.seed));
    csv.cell(r.err_sq);
    for (int i = 0; i < state_dim; ++i) csv.cell(r.err_abs(i));
    if (history) csv.cell(r.diverged ? 1 : 0);
    csv.end_row();
  }
  return csv.str();
}

std::vector<ComparisonRow> parse_rows(const std::string& text) {
  const CsvTable table = parse_csv(text);
  const bool history = table.column("iteration") >= 0;
  int state_dim = 0;
  while (table.column("err_abs_" + axis_name(state_dim)) >= 0) ++state_dim;
  std::vector<ComparisonRow> rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    ComparisonRow row;
    row.arm = table.rows[r].at(static_cast<std::size_t>(table.column("arm")));
    row.iteration = history ? static_cast<int>(table.number(r, "iteration")) : 0;
    row.budget = static_cast<int>(table.number(r, "budget"));
    row.seed = std::stoull(table.rows[r].at(static_cast<std::size_t>(table.column("seed"))));
    row.err_sq = table.number(r, "err_sq");
    row.err_abs.resize(state_dim);
    for (int i = 0; i < state_dim; ++i) row.err_abs(i) = table.number(r, "err_abs_" + axis_name(i));
    row.diverged = history ? table.number(r, "diverged") != 0.0 : !std::isfinite(row.err_sq);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::string comparison_csv(const std::vector<ComparisonRow>& rows, int state_dim) {
  return rows_csv(rows, state_dim, false);
}

std::vector<ComparisonRow> parse_comparison_csv(const std::string& text) { return parse_rows(text); }

std::string history_csv(const std::vector<ComparisonRow>& rows, int state_dim) {
  return rows_csv(rows, state_dim, true);
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  const int n = rows.empty() ? 0 : static_cast<int>(rows.front().mean_err_abs.size());
  std::vector<std::string> header = {"arm", "budget", "seeds", "mean_err_sq", "std_err_sq",
                                     "median_err_sq"};
  for (int i = 0; i < n; ++i) header.push_back("mean_err_abs_" + axis_name(i));
  CsvWriter csv(header);
  for (const auto& s : rows) {
    csv.cell(s.arm).cell(s.budget).cell(s.seeds).cell(s.mean_err_sq).cell(s.std_err_sq).cell(s.median_err_sq);
    for (int i = 0; i < n; ++i) csv.cell(s.mean_err_abs(i));
    csv.end_row();
  }
  return csv.str();
}

std::string improvement_csv(const std::vector<ImprovementRow>& rows) {
  CsvWriter csv({"budget", "pairs", "wins", "median_percent", "percent_of_means"});
  for (const auto& r : rows) {
    csv.cell(r.budget).cell(r.pairs).cell(r.wins).cell(r.median_percent).cell(r.percent_of_means);
    csv.end_row();
  }
  return csv.str();
}

ExperimentResult compare_arms(const ExperimentConfig& config, const std::string& outdir, int jobs,
                              bool resume) {
  config.validate();
  require(config.arms.size() >= 2, "compare_arms: at least two arms are required");
  const std::size_t count = static_cast<std::size_t>(config.seeds);
  std::vector<std::vector<ComparisonRow>> rows(count), history(count);
  const int inner_jobs = count > 1 ? 1 : jobs;

  parallel_for(
      count,
      [&](std::size_t i) {
        const std::uint64_t seed = config.master_seed + i;
        if (resume && !outdir.empty()) {
          const std::string base = outdir + "/seeds/" + seed_dir(seed);
          if (std::filesystem::exists(base + ".csv") && std::filesystem::exists(base + ".history.csv")) {
            rows[i] = parse_rows(read_text(base + ".csv"));
            history[i] = parse_rows(read_text(base + ".history.csv"));
            return;
          }
        }
        SeedResult r = run_seed(config, seed, outdir, inner_jobs);
        rows[i] = std::move(r.rows);
        history[i] = std::move(r.history);
      },
      jobs);

  ExperimentResult result;
  result.state_dim = systems::builtin(config.plant, config.plant_seed.value_or(config.master_seed),
                                      config.plant_options)
                         .state_dim();
  for (std::size_t i = 0; i < count; ++i) {
    result.rows.insert(result.rows.end(), rows[i].begin(), rows[i].end());
    result.history.insert(result.history.end(), history[i].begin(), history[i].end());
  }
  result.summary = summarize(result.rows);
  result.improvement = improvement(result.rows);
  if (!outdir.empty()) {
    write_text(outdir + "/comparison.csv", comparison_csv(result.rows, result.state_dim));
    write_text(outdir + "/iterations.csv", history_csv(result.history, result.state_dim));
    write_text(outdir + "/summary.csv", summary_csv(result.summary));
    write_text(outdir + "/improvement.csv", improvement_csv(result.improvement));
  }
  return result;
}

std::vector<TestPoint> task_test_set(const SeedSetup& setup, const gp::ResidualModel& prior,
                                     int rollouts, std::uint64_t seed, gp::SampleMode mode,
                                     int anchors) {
  require(rollouts >= 1, "task_test_set: rollouts must be positive");
  std::vector<TestPoint> points;
  const MatrixXd& ref = setup.eval_task;
  const Eigen::Index n = setup.plant.state_dim();
  for (int j = 0; j < rollouts; ++j) {
    const simulate::RolloutResult belief = simulate::belief_rollout(
        setup.plant, setup.gains, prior, ref, derive_seed(seed, static_cast<std::uint64_t>(j)), mode, anchors);
    const MatrixXd& states = belief.trajectory.states;
    VectorXd integral = VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < states.rows(); ++k) {
      TestPoint p;
      p.x = states.row(k).transpose();
      p.x_ref = ref.row(k).transpose();
      p.x_ref_next = ref.row(std::min(k + 1, ref.rows() - 1)).transpose();
      integral = control::update_integral(setup.gains, integral, p.x_ref, p.x);
      p.integral = integral;
      points.push_back(std::move(p));
    }
  }
  return points;
}

double test_set_error(systems::SealedPlant& plant, const SeedSetup& setup,
                      const gp::ResidualModel& model, const std::vector<TestPoint>& points) {
  require(!points.empty(), "test_set_error: empty test set");
  const systems::ResidualFn g_hat = simulate::mean_residual(model);
  double total = 0.0;
  for (const TestPoint& p : points) {
    const auto solve = control::policy(setup.gains, p.integral, p.x_ref, p.x_ref_next, p.x, setup.plant, g_hat);
    const VectorXd desired = control::desired_state(setup.gains, p.integral, p.x_ref, p.x_ref_next, p.x);
    VectorXd next;
    try {
      next = plant.step(p.x, solve.input, systems::Access::kEvaluation);
    } catch (const DivergenceError&) {
      return kInf;
    }
    total += (next - desired).squaredNorm();
  }
  return total / static_cast<double>(points.size());
}

CorrelationMetric parse_correlation_metric(const std::string& name) {
  if (name == "test_set") return CorrelationMetric::kTestSet;
  if (name == "closed_loop") return CorrelationMetric::kClosedLoop;
  throw InputError("unknown correlation metric '" + name + "' (test_set, closed_loop)");
}

std::string to_string(CorrelationMetric metric) {
  return metric == CorrelationMetric::kTestSet ? "test_set" : "closed_loop";
}

std::string CorrelationResult::to_csv() const {
  CsvWriter csv({"candidate_id", "is_task", "cost", "error", "test_error", "closed_loop_error",
                 "diverged"});
  for (const auto& p : points) {
    csv.cell(p.id).cell(p.is_task ? 1 : 0).cell(p.cost).cell(p.error(metric)).cell(p.test_error);
    csv.cell(p.closed_loop_error).cell(p.diverged ? 1 : 0);
    csv.end_row();
  }
  return csv.str();
}

CorrelationResult correlate_candidates(const ExperimentConfig& config, const SeedSetup& setup,
                                       systems::SealedPlant& plant, const gp::ResidualModel& prior,
                                       const std::vector<trajgen::DeviationParams>& candidates,
                                       const std::vector<bool>& is_task, int jobs) {
  require(is_task.size() == candidates.size(), "correlate: flag count mismatch");
  trajgen::SelectionConfig sc = config.selection;
  sc.seed = derive_seed(setup.seed, kCorrelateTag, kSelectTag);
  sc.jobs = jobs;
  sc.sample_mode = config.sample_mode;
  const trajgen::SelectionResult selection =
      trajgen::evaluate_candidates(setup.plant, setup.gains, prior, setup.task, candidates, sc);

  CorrelationResult result;
  result.metric = parse_correlation_metric(config.correlate_metric);
  const std::vector<TestPoint> test_set =
      task_test_set(setup, prior, config.correlate_test_rollouts,
                    derive_seed(setup.seed, kCorrelateTag, kTestTag), config.sample_mode,
                    config.selection.anchors);
  result.points.resize(candidates.size());
  const std::uint64_t noise = derive_seed(setup.seed, kCorrelateTag, kNoiseTag);
  const std::uint64_t update = derive_seed(setup.seed, kCorrelateTag, kUpdateTag);
  parallel_for(
      candidates.size(),
      [&](std::size_t i) {
        const trajgen::CandidateReport& c = selection.candidates[i];
        CorrelationPoint& p = result.points[i];
        p.id = c.id;
        p.is_task = is_task[i];
        p.cost = c.cost;
        p.reference = c.reference;
        p.test_error = kInf;
        p.closed_loop_error = kInf;
        if (!c.feasible) {
          p.diverged = true;
          return;
        }
        const simulate::RolloutResult executed = simulate::rollout(
            plant, setup.gains, prior, c.reference, experiment_config(config, setup, noise, 1));
        if (executed.diverged) {
          p.diverged = true;
          return;
        }
        const gp::ResidualModel model =
            update_model(prior, executed, config.correlate_budget, config, setup, update);
        const simulate::TrackingMetrics m = simulate::tracking_error(evaluate_task(plant, setup, model));
        p.closed_loop_error = m.squared;
        p.test_error = test_set_error(plant, setup, model, test_set);
        p.diverged = m.diverged || !std::isfinite(p.test_error);
      },
      jobs);

  const CorrelationMetric other = result.metric == CorrelationMetric::kTestSet
                                     ? CorrelationMetric::kClosedLoop
                                     : CorrelationMetric::kTestSet;
  std::vector<double> costs, errors, other_errors;
  for (const auto& p : result.points) {
    if (p.diverged) {
      result.excluded.push_back(p.id);
      continue;
    }
    costs.push_back(p.cost);
    errors.push_back(p.error(result.metric));
    other_errors.push_back(p.error(other));
  }
  const RankCorrelation rc = spearman(costs, errors);
  result.rho = rc.rho;
  result.degenerate = rc.degenerate;
  const RankCorrelation ro = spearman(costs, other_errors);
  result.rho_other = ro.rho;
  result.degenerate_other = ro.degenerate;
  return result;
}

CorrelationResult correlation_study(const ExperimentConfig& config, std::uint64_t seed,
                                    const std::string& outdir, int jobs) {
  config.validate();
  const SeedSetup setup = setup_seed(config, seed);
  systems::SealedPlant plant(setup.plant);
  const PriorResult prior = build_prior(plant, setup, config);

  trajgen::SelectionConfig sc = config.selection;
  std::vector<trajgen::DeviationParams> candidates =
      trajgen::sample_candidates(config.correlate_candidates, trajgen::candidate_caps(setup.plant, setup.task, sc),
                                 derive_seed(seed, kCorrelateTag));
  candidates.push_back(trajgen::zero_deviation(setup.plant, sc));
  std::vector<bool> is_task(candidates.size(), false);
  is_task.back() = true;

  CorrelationResult result = correlate_candidates(config, setup, plant, prior.model, candidates, is_task, jobs);
  if (!outdir.empty()) {
    write_text(outdir + "/correlation.csv", result.to_csv());
    const double T = setup.plant.sampling_time();
    write_text(outdir + "/task.csv", reference_csv(setup.task, T));
    for (const auto& p : result.points) {
      write_text(outdir + "/candidates/candidate_" + std::to_string(p.id) + ".csv",
                 reference_csv(p.reference, T));
    }
    KeyValue kv;
    kv.set("seed", std::to_string(seed));
    kv.set("metric", to_string(result.metric));
    kv.set("rho", result.rho);
    kv.set("rho_other", result.rho_other);
    kv.set("degenerate", result.degenerate ? "true" : "false");
    kv.set("candidates", static_cast<int>(result.points.size()));
    kv.set("excluded", static_cast<int>(result.excluded.size()));
    kv.save(outdir + "/correlation.kv");
  }
  return result;
}

}  // namespace infotraj::pipeline
