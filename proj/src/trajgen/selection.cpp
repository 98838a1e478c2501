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


#include "infotraj/trajgen/selection.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "infotraj/csv.hpp"
#include "infotraj/gp/kmedoids.hpp"
#include "infotraj/trajgen/tasks.hpp"

namespace infotraj::trajgen {

namespace {
constexpr std::uint64_t kCandidateTag = 0x63616e64;
constexpr std::uint64_t kBeliefTag = 0x62656c66;
constexpr std::uint64_t kMedoidTag = 0x6d65646f;
constexpr std::uint64_t kRegionTag = 0x7265676e;
constexpr std::uint64_t kEvalTag = 0x6576616c;
}  // namespace

std::string SelectionResult::report_csv() const {
  std::size_t coefficients = 0;
  for (const auto& c : candidates) coefficients = std::max(coefficients, c.params.frequencies().size());
  std::vector<std::string> header = {"candidate_id", "cost", "feasible", "rank"};
  for (std::size_t i = 1; i <= coefficients; ++i) header.push_back("f_" + std::to_string(i));
  for (std::size_t i = 1; i <= coefficients; ++i) header.push_back("alpha_" + std::to_string(i));
  CsvWriter csv(header);
  for (const auto& c : candidates) {
    csv.cell(c.id).cell(c.cost).cell(std::string(c.feasible ? "true" : "false")).cell(c.rank);
    const auto f = c.params.frequencies();
    const auto a = c.params.amplitudes();
    for (std::size_t i = 0; i < coefficients; ++i) csv.cell(i < f.size() ? f[i] : 0.0);
    for (std::size_t i = 0; i < coefficients; ++i) csv.cell(i < a.size() ? a[i] : 0.0);
    csv.end_row();
  }
  return csv.str();
}

CandidateReport evaluate_candidate(const systems::Plant& plant, const control::ControllerGains& gains,
                                   const gp::ResidualModel& model, const MatrixXd& task,
                                   const DeviationParams& params, int id,
                                   const MatrixXd& eval_points, const SelectionConfig& config) {
  require(config.belief_rollouts >= 1, "selection: at least one belief rollout per candidate");
  CandidateReport report;
  report.id = id;
  report.params = params;
  report.reference = apply_deviation(task, params, plant.sampling_time());
  report.feasible = true;
  const MatrixXd anchors = simulate::belief_anchors(plant, gains, model, report.reference, config.anchors);
  for (int r = 0; r < config.belief_rollouts; ++r) {
    const std::uint64_t seed = derive_seed(config.seed, kBeliefTag, static_cast<std::uint64_t>(id),
                                           static_cast<std::uint64_t>(r));
    gp::ResidualSample sample = gp::sample_function(model, anchors, seed, config.sample_mode);
    simulate::RolloutConfig rc;
    rc.mode = simulate::Mode::kBelief;
    rc.seed = seed;
    rc.trajectory_id = id;
    simulate::RolloutResult run = simulate::rollout(plant, gains, model, report.reference, sample, rc);
    if (run.diverged) {
      report.feasible = false;
      report.cost = std::numeric_limits<double>::infinity();
      if (r == 0) report.belief = std::move(run);
      return report;
    }
    const auto rows = gp::kmedoids_rows(run.features, config.subsample,
                                        derive_seed(seed, kMedoidTag));
    std::vector<gp::Dataset> data;
    for (const auto& d : run.datasets()) data.push_back(d.subset(rows));
    try {
      report.rollout_costs.push_back(region::informative_cost(model, data, eval_points).value);
    } catch (const NumericalError& e) {
      throw NumericalError("candidate " + std::to_string(id) + ": " + e.what());
    }
    if (r == 0) report.belief = std::move(run);
  }
  report.cost = std::accumulate(report.rollout_costs.begin(), report.rollout_costs.end(), 0.0) /
                static_cast<double>(report.rollout_costs.size());
  return report;
}

void rank_candidates(std::vector<CandidateReport>& candidates, int& winner) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    candidates[i].rank = -1;
    if (candidates[i].feasible) order.push_back(i);
  }
  if (order.empty()) {
    throw SelectionError("selection: every candidate diverged; reduce the amplitude caps");
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (candidates[a].cost != candidates[b].cost) return candidates[a].cost < candidates[b].cost;
    return candidates[a].id < candidates[b].id;
  });
  for (std::size_t r = 0; r < order.size(); ++r) candidates[order[r]].rank = static_cast<int>(r);
  winner = static_cast<int>(order.front());
}

SelectionResult evaluate_candidates(const systems::Plant& plant, const control::ControllerGains& gains,
                                    const gp::ResidualModel& model, const MatrixXd& task,
                                    const std::vector<DeviationParams>& params,
                                    const SelectionConfig& config) {
  require(!params.empty(), "selection: no candidates");
  SelectionResult result;
  region::RegionOptions ro = config.region;
  ro.seed = derive_seed(config.seed, kRegionTag);
  ro.sample_mode = config.sample_mode;
  ro.anchors = config.anchors;
  result.region = region::estimate_region(plant, gains, model, task, ro);
  result.eval_points = region::sample_evaluation_set(result.region, config.eval_points,
                                                     derive_seed(config.seed, kEvalTag));
  result.candidates.resize(params.size());
  parallel_for(
      params.size(),
      [&](std::size_t i) {
        result.candidates[i] = evaluate_candidate(plant, gains, model, task, params[i],
                                                  static_cast<int>(i), result.eval_points, config);
      },
      config.jobs);
  rank_candidates(result.candidates, result.winner);
  return result;
}

CandidateCaps candidate_caps(const systems::Plant& plant, const MatrixXd& task,
                             const SelectionConfig& config) {
  CandidateCaps caps;
  caps.axes = excited_axes(plant);
  caps.integrations = deviation_integrations(plant);
  if (caps.integrations == 0 || task.rows() < 2) {
    caps.amplitude = default_amplitude_caps(task, caps.axes, config.amplitude_fraction);
  } else {
    // Caps relative to the task's own derivative, where the signal acts.
    const Eigen::Index n = task.rows() - 1;
    const MatrixXd rate = (task.bottomRows(n) - task.topRows(n)) / plant.sampling_time();
    caps.amplitude = default_amplitude_caps(rate, caps.axes, config.amplitude_fraction);
  }
  caps.f_max = config.f_max;
  caps.tones = config.tones;
  caps.bin_horizon = std::max(1, static_cast<int>(task.rows()) - 1);
  caps.sampling_time = plant.sampling_time();
  return caps;
}

DeviationParams zero_deviation(const systems::Plant& plant, const SelectionConfig& config) {
  DeviationParams p;
  p.axes = excited_axes(plant);
  p.f_max = config.f_max;
  p.integrations = deviation_integrations(plant);
  for (std::size_t a = 0; a < p.axes.size(); ++a) {
    p.tones.push_back(std::vector<Tone>(static_cast<std::size_t>(config.tones), Tone{config.f_max, 0.0}));
  }
  return p;
}

SelectionResult select_informative(const systems::Plant& plant, const control::ControllerGains& gains,
                                   const gp::ResidualModel& model, const MatrixXd& task,
                                   const SelectionConfig& config) {
  std::vector<DeviationParams> params = sample_candidates(
      config.candidates, candidate_caps(plant, task, config), derive_seed(config.seed, kCandidateTag));
  if (config.include_task) params.push_back(zero_deviation(plant, config));
  return evaluate_candidates(plant, gains, model, task, params, config);
}

}  // namespace infotraj::trajgen
