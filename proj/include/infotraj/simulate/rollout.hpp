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


#ifndef INFOTRAJ_SIMULATE_ROLLOUT_HPP_
#define INFOTRAJ_SIMULATE_ROLLOUT_HPP_

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "infotraj/common.hpp"
#include "infotraj/control/controller.hpp"
#include "infotraj/gp/function_sample.hpp"
#include "infotraj/gp/residual_model.hpp"
#include "infotraj/systems/plant.hpp"
#include "infotraj/systems/trajectory.hpp"

namespace infotraj::simulate {

enum class Mode { kExperiment, kBelief, kEvaluation };

std::string to_string(Mode mode);

struct RolloutConfig {
  Mode mode = Mode::kExperiment;
  std::uint64_t seed = 0;
  VectorXd initial_offset;         // x[0] = x_ref[0] + offset; empty means zero
  double observation_noise = 0.0;  // std of noise on residual targets (experiment mode)
  double divergence_factor = 10.0;
  std::int64_t trajectory_id = 0;
};

// A reference with rows k = 0..N produces N + 1 plant steps: the input at
// k = N holds the last reference point, and x[N+1] only serves the final
// residual observation.
struct RolloutResult {
  Mode mode = Mode::kExperiment;
  std::uint64_t seed = 0;
  systems::Trajectory trajectory;  // executed states and inputs, rows k = 0..N
  MatrixXd reference;              // rows k = 0..N
  VectorXd error;                  // ||x_ref[k] - x[k]|| per row
  bool diverged = false;
  int plant_steps = 0;
  int unconverged_solves = 0;
  MatrixXd features;       // GP feature of (x[k], w[k]), one row per step
  MatrixXd targets;        // x[k+1] - h(x[k], w[k]), observed
  MatrixXd clean_targets;  // same without observation noise
  std::vector<std::int64_t> trajectory_ids;

  /// Observations as per-channel GP datasets.
  std::vector<gp::Dataset> datasets() const;
  /// CSV: k,x_0..,u_0..,xref_0..,err
  std::string to_csv() const;
  KeyValue metadata(double cost = std::numeric_limits<double>::quiet_NaN()) const;
};

/// The controller's residual estimate: posterior mean of `model`.
systems::ResidualFn mean_residual(const gp::ResidualModel& model);

/// Experiment or evaluation rollout on the sealed plant; every step is counted
/// under the access kind matching `config.mode`.
RolloutResult rollout(systems::SealedPlant& plant, const control::ControllerGains& gains,
                      const gp::ResidualModel& model, const MatrixXd& x_ref,
                      const RolloutConfig& config);

/// Belief rollout: steps h + g' with g' a posterior sample. Never touches the
/// true dynamics.
RolloutResult rollout(const systems::Plant& plant, const control::ControllerGains& gains,
                      const gp::ResidualModel& model, const MatrixXd& x_ref,
                      gp::ResidualSample& sample, const RolloutConfig& config);

/// Shared loop: `step` returns x[k+1] for (x[k], w[k]).
using StepFn = std::function<VectorXd(const VectorXd& x, const VectorXd& w)>;
RolloutResult closed_loop(const systems::Plant& plant, const control::ControllerGains& gains,
                          const systems::ResidualFn& g_hat, const gp::FeatureMap& features,
                          const MatrixXd& x_ref, const RolloutConfig& config, const StepFn& step);

/// Feature vectors at `count` evenly spaced steps of a rollout that uses the
/// posterior mean as the true residual. Used as joint-sampling anchors.
MatrixXd belief_anchors(const systems::Plant& plant, const control::ControllerGains& gains,
                        const gp::ResidualModel& model, const MatrixXd& x_ref, int count);

/// Draws g' with anchors along `x_ref` and runs one belief rollout.
RolloutResult belief_rollout(const systems::Plant& plant, const control::ControllerGains& gains,
                             const gp::ResidualModel& model, const MatrixXd& x_ref,
                             std::uint64_t seed, gp::SampleMode mode = gp::SampleMode::kJointAnchors,
                             int anchors = 30);

struct TrackingMetrics {
  double squared = 0.0;     // sum over k = 1..N of ||x_ref[k] - x[k]||^2
  VectorXd absolute;        // mean over k = 1..N of |x_ref[k] - x[k]| per axis
  bool diverged = false;

  double mean_absolute() const { return absolute.mean(); }
};

TrackingMetrics tracking_error(const RolloutResult& result);

struct CompensationCheck {
  double max_error = 0.0;           // max over steps of the infinity norm
  double steady_state_error = 0.0;  // mean infinity norm over the last quarter
  bool diverged = false;
  int unconverged_solves = 0;
};

enum class Compensation { kTrueResidual, kNone };

/// Closed loop with the controller given the true residual (or none).
CompensationCheck verify_compensation(const systems::Plant& plant,
                                     const control::ControllerGains& gains, const MatrixXd& x_ref,
                                     Compensation compensation);

}  // namespace infotraj::simulate

#endif  // INFOTRAJ_SIMULATE_ROLLOUT_HPP_
