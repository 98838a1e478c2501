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


// The outer learning loop. Per paired seed: draw the plant, run the task once
// with an empty model to build the prior, then for every arm and iteration
// execute one reference on the sealed plant (the selected informative
// trajectory, the task again, or nothing), update the model at every data
// budget and score it by tracking the task on the plant.

#ifndef INFOTRAJ_PIPELINE_EXPERIMENT_HPP_
#define INFOTRAJ_PIPELINE_EXPERIMENT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "infotraj/pipeline/config.hpp"
#include "infotraj/simulate/rollout.hpp"
#include "infotraj/trajgen/selection.hpp"

namespace infotraj::pipeline {

/// Everything a seed needs that does not touch the true dynamics.
struct SeedSetup {
  std::uint64_t seed = 0;
  systems::Plant plant;
  control::ControllerGains gains;
  MatrixXd task;       // training reference
  MatrixXd eval_task;  // scoring reference (task at eval.scale)
  KernelSetup kernels;
};

/// CSV: k,t,xref_0..
std::string reference_csv(const MatrixXd& reference, double sampling_time);

SeedSetup setup_seed(const ExperimentConfig& config, std::uint64_t seed);
gp::ResidualModel empty_model(const ExperimentConfig& config, const SeedSetup& setup);

/// Adds the k-medoids subsample of `data` (at most `budget` points) to `model`
/// and refits the kernels when fitting is enabled.
gp::ResidualModel update_model(const gp::ResidualModel& model, const simulate::RolloutResult& data,
                               int budget, const ExperimentConfig& config, const SeedSetup& setup,
                               std::uint64_t seed);

/// Evaluation rollout of the scoring reference on the sealed plant.
simulate::RolloutResult evaluate_task(systems::SealedPlant& plant, const SeedSetup& setup,
                                      const gp::ResidualModel& model);

struct PriorResult {
  gp::ResidualModel model;
  simulate::RolloutResult rollout;  // the task run with an empty model
  simulate::RolloutResult evaluation;
  simulate::TrackingMetrics metrics;
};

/// First task run with an empty model; its subsampled data is the prior.
PriorResult build_prior(systems::SealedPlant& plant, const SeedSetup& setup,
                        const ExperimentConfig& config);

struct BudgetResult {
  int budget = 0;
  gp::ResidualModel model;
  simulate::RolloutResult evaluation;
  simulate::TrackingMetrics metrics;
};

struct IterationRecord {
  int iteration = 0;  // 1-based; 0 is the prior
  Arm arm = Arm::kInformative;
  std::uint64_t seed = 0;
  std::int64_t trajectory_id = -1;  // -1 when nothing was executed
  double cost = 0.0;                // informative cost of the executed reference
  bool diverged = false;
  long long experiment_steps = 0;
  MatrixXd reference;  // executed reference (empty for no_learning)
  std::optional<simulate::RolloutResult> executed;
  std::optional<trajgen::SelectionResult> selection;
  std::vector<BudgetResult> budgets;
  double wall_seconds = 0.0;

  const BudgetResult& largest() const { return budgets.back(); }
  KeyValue metadata() const;
};

/// One iteration of one arm, starting from `model`.
IterationRecord run_iteration(systems::SealedPlant& plant, const SeedSetup& setup,
                              const ExperimentConfig& config, const gp::ResidualModel& model,
                              Arm arm, int iteration, int jobs = 1);

/// One row of comparison.csv.
struct ComparisonRow {
  std::string arm;
  int iteration = 0;
  int budget = 0;
  std::uint64_t seed = 0;
  double err_sq = 0.0;
  VectorXd err_abs;  // per state axis
  bool diverged = false;
};

struct SeedResult {
  std::uint64_t seed = 0;
  simulate::TrackingMetrics prior_metrics;
  long long prior_steps = 0;
  std::vector<std::vector<IterationRecord>> arms;  // [arm][iteration - 1]
  std::vector<long long> experiment_steps;         // per arm, prior excluded
  std::vector<ComparisonRow> rows;                 // final iteration, every arm and budget
  std::vector<ComparisonRow> history;              // prior plus every iteration
};

/// Runs every arm for one paired seed. Arms share the plant draw, the prior
/// and the observation-noise streams. Writes artifacts under `outdir` when it
/// is not empty.
SeedResult run_seed(const ExperimentConfig& config, std::uint64_t seed, const std::string& outdir,
                    int jobs = 1);

struct SummaryRow {
  std::string arm;
  int budget = 0;
  int seeds = 0;
  double mean_err_sq = 0.0;
  double std_err_sq = 0.0;
  double median_err_sq = 0.0;
  VectorXd mean_err_abs;
};

struct ImprovementRow {
  int budget = 0;
  int pairs = 0;
  int wins = 0;                    // informative strictly below the baseline
  double median_percent = 0.0;     // median over seeds of 100 (b - a) / b
  double percent_of_means = 0.0;   // 100 (mean b - mean a) / mean b
};

std::vector<SummaryRow> summarize(const std::vector<ComparisonRow>& rows);
/// Paired improvement of `arm` over `baseline` per budget.
std::vector<ImprovementRow> improvement(const std::vector<ComparisonRow>& rows,
                                        const std::string& arm = "informative",
                                        const std::string& baseline = "non_informative");

std::string comparison_csv(const std::vector<ComparisonRow>& rows, int state_dim);
std::vector<ComparisonRow> parse_comparison_csv(const std::string& text);
std::string history_csv(const std::vector<ComparisonRow>& rows, int state_dim);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string improvement_csv(const std::vector<ImprovementRow>& rows);

struct ExperimentResult {
  std::vector<ComparisonRow> rows;
  std::vector<ComparisonRow> history;
  std::vector<SummaryRow> summary;
  std::vector<ImprovementRow> improvement;
  int state_dim = 0;
};

/// All arms over seeds master_seed .. master_seed + seeds - 1. With an output
/// directory, per-seed results are persisted as they finish; `resume` reuses
/// them instead of recomputing.
ExperimentResult compare_arms(const ExperimentConfig& config, const std::string& outdir = "",
                              int jobs = 1, bool resume = false);

/// Controller situations along the scoring reference as the prior model
/// predicts them: states of belief rollouts under posterior samples, with the
/// reference and integral state the controller would hold there.
struct TestPoint {
  VectorXd x;
  VectorXd x_ref;
  VectorXd x_ref_next;
  VectorXd integral;
};

std::vector<TestPoint> task_test_set(const SeedSetup& setup, const gp::ResidualModel& prior,
                                     int rollouts, std::uint64_t seed, gp::SampleMode mode,
                                     int anchors);

/// Mean squared one-step tracking error over `points`: the controller using
/// `model` commands an input at each point, the sealed plant executes one step
/// from there (evaluation access) and the result is compared with the desired
/// next state.
double test_set_error(systems::SealedPlant& plant, const SeedSetup& setup,
                      const gp::ResidualModel& model, const std::vector<TestPoint>& points);

enum class CorrelationMetric {
  kTestSet,     // one-step error on the prior model's test set
  kClosedLoop,  // err_sq of an evaluation run of the scoring reference
};

CorrelationMetric parse_correlation_metric(const std::string& name);
std::string to_string(CorrelationMetric metric);

struct CorrelationPoint {
  int id = 0;
  bool is_task = false;
  double cost = 0.0;
  double test_error = 0.0;
  double closed_loop_error = 0.0;
  bool diverged = false;
  MatrixXd reference;

  double error(CorrelationMetric metric) const {
    return metric == CorrelationMetric::kTestSet ? test_error : closed_loop_error;
  }
};

struct CorrelationResult {
  std::vector<CorrelationPoint> points;
  std::vector<int> excluded;  // diverged candidates
  CorrelationMetric metric = CorrelationMetric::kTestSet;
  double rho = 0.0;  // for `metric`
  bool degenerate = false;
  double rho_other = 0.0;  // for the other metric, diagnostics only
  bool degenerate_other = false;

  std::string to_csv() const;
};

/// Spearman correlation between the pre-execution informative cost and the
/// task tracking error after learning from the candidate. Candidates are
/// `config.correlate_candidates` sampled ones plus the task itself; every
/// model is the prior augmented with `config.correlate_budget` points of the
/// candidate's data.
CorrelationResult correlation_study(const ExperimentConfig& config, std::uint64_t seed,
                                    const std::string& outdir = "", int jobs = 1);

/// Same, for given candidates. Exposed for constructed instances.
CorrelationResult correlate_candidates(const ExperimentConfig& config, const SeedSetup& setup,
                                       systems::SealedPlant& plant, const gp::ResidualModel& prior,
                                       const std::vector<trajgen::DeviationParams>& candidates,
                                       const std::vector<bool>& is_task, int jobs = 1);

}  // namespace infotraj::pipeline

#endif  // INFOTRAJ_PIPELINE_EXPERIMENT_HPP_
