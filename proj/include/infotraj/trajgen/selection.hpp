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


// Sampling-based selection of the most informative reference:
//   1. sample deviation parameters,
//   2. belief-roll each candidate with sampled residuals,
//   3. condition a model copy on each rollout's (k-medoids subsampled) data,
//   4. estimate the task-relevant region once from task rollouts,
//   5. score each candidate by the summed posterior variance on the region,
//   6. pick the cheapest feasible candidate.

#ifndef INFOTRAJ_TRAJGEN_SELECTION_HPP_
#define INFOTRAJ_TRAJGEN_SELECTION_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "infotraj/control/controller.hpp"
#include "infotraj/gp/function_sample.hpp"
#include "infotraj/gp/residual_model.hpp"
#include "infotraj/region/region.hpp"
#include "infotraj/simulate/rollout.hpp"
#include "infotraj/systems/plant.hpp"
#include "infotraj/trajgen/deviation.hpp"

namespace infotraj::trajgen {

struct SelectionConfig {
  int candidates = 20;
  int belief_rollouts = 3;  // per candidate, cost averaged
  int subsample = 40;       // k-medoids budget before conditioning
  int eval_points = 512;    // S
  double amplitude_fraction = 0.25;
  double f_max = 2.0;
  int tones = 2;
  bool include_task = false;  // append the zero-deviation candidate
  gp::SampleMode sample_mode = gp::SampleMode::kJointAnchors;
  int anchors = 30;
  region::RegionOptions region;
  std::uint64_t seed = 0;
  int jobs = 0;
};

struct CandidateReport {
  int id = 0;
  DeviationParams params;
  MatrixXd reference;
  simulate::RolloutResult belief;  // first belief rollout
  std::vector<double> rollout_costs;
  double cost = 0.0;
  bool feasible = false;
  int rank = -1;  // 0 is the winner; -1 when infeasible
};

struct SelectionResult {
  std::vector<CandidateReport> candidates;
  int winner = -1;
  region::RegionEstimate region;
  MatrixXd eval_points;

  const CandidateReport& best() const { return candidates.at(static_cast<std::size_t>(winner)); }
  /// CSV: candidate_id,cost,feasible,rank,f_1..,alpha_1..
  std::string report_csv() const;
};

/// Scores one candidate against fixed evaluation points.
CandidateReport evaluate_candidate(const systems::Plant& plant, const control::ControllerGains& gains,
                                   const gp::ResidualModel& model, const MatrixXd& task,
                                   const DeviationParams& params, int id,
                                   const MatrixXd& eval_points, const SelectionConfig& config);

/// Ranks feasible candidates by cost (ties by id) and sets the winner.
/// Throws SelectionError when nothing is feasible.
void rank_candidates(std::vector<CandidateReport>& candidates, int& winner);

/// Region, evaluation points, scoring and ranking for a given candidate list.
SelectionResult evaluate_candidates(const systems::Plant& plant, const control::ControllerGains& gains,
                                    const gp::ResidualModel& model, const MatrixXd& task,
                                    const std::vector<DeviationParams>& params,
                                    const SelectionConfig& config);

/// Samples candidates around `task`, then evaluate_candidates.
SelectionResult select_informative(const systems::Plant& plant, const control::ControllerGains& gains,
                                   const gp::ResidualModel& model, const MatrixXd& task,
                                   const SelectionConfig& config);

/// The sampling caps select_informative uses for `task`.
CandidateCaps candidate_caps(const systems::Plant& plant, const MatrixXd& task,
                             const SelectionConfig& config);

/// Zero-amplitude parameters on the plant's excited axes.
DeviationParams zero_deviation(const systems::Plant& plant, const SelectionConfig& config);

}  // namespace infotraj::trajgen

#endif  // INFOTRAJ_TRAJGEN_SELECTION_HPP_
