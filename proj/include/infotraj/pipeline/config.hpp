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


// Experiment configuration in flat `section.key = value` form. Unknown keys
// are rejected so that typos cannot silently fall back to defaults.
//
//   plant.name               oadi | attitude3 (required)
//   plant.seed               fixed plant draw; default: the paired seed
//   plant.residual_scale, plant.sampling_time, plant.oadi_axes
//   task.amplitude, task.period, task.horizon
//   eval.scale               reference scale of the scoring task (1.0)
//   controller.K, controller.K_I, controller.integral_clamp (matrices/vector)
//   controller.max_iterations, controller.tolerance, controller.damping
//   gp.features              input | state_input
//   gp.sample_mode           joint | pointwise
//   gp.signal_variance, gp.lengthscale, gp.noise_variance   kernel init
//   fit.enabled, fit.restarts, fit.max_evaluations
//   experiment.arms          informative,non_informative,no_learning
//   experiment.budgets       strictly increasing, e.g. 20,40,60,80
//   experiment.prior_budget  points kept from the prior task run
//   experiment.iterations, experiment.seeds, experiment.observation_noise
//   selection.candidates, selection.belief_rollouts, selection.subsample,
//   selection.eval_points, selection.amplitude_fraction, selection.f_max,
//   selection.tones, selection.include_task, selection.anchors
//   region.rollouts, region.grid_size, region.epsilon
//   correlate.candidates, correlate.budget
//   correlate.metric         test_set | closed_loop
//   correlate.test_rollouts  belief rollouts forming the test set
//   run.seed                 master seed

#ifndef INFOTRAJ_PIPELINE_CONFIG_HPP_
#define INFOTRAJ_PIPELINE_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "infotraj/control/controller.hpp"
#include "infotraj/gp/hyperparameters.hpp"
#include "infotraj/gp/kernel.hpp"
#include "infotraj/gp/residual_model.hpp"
#include "infotraj/kv.hpp"
#include "infotraj/systems/plant.hpp"
#include "infotraj/trajgen/selection.hpp"
#include "infotraj/trajgen/tasks.hpp"

namespace infotraj::pipeline {

enum class Arm { kInformative, kNonInformative, kNoLearning };

Arm parse_arm(const std::string& name);
std::string to_string(Arm arm);

struct KernelInit {
  std::optional<double> signal_variance;
  std::optional<VectorXd> lengthscale;  // one entry (isotropic) or one per dimension
  std::optional<double> noise_variance;
};

struct ExperimentConfig {
  std::string plant;
  std::optional<std::uint64_t> plant_seed;
  systems::PlantOptions plant_options;
  trajgen::TaskOptions task;
  double eval_scale = 1.0;
  std::optional<control::ControllerGains> gains;
  gp::FeatureMode features = gp::FeatureMode::kInput;
  gp::SampleMode sample_mode = gp::SampleMode::kJointAnchors;
  KernelInit kernel;
  bool fit_enabled = true;
  gp::FitOptions fit{2, 150, 0};
  std::vector<Arm> arms = {Arm::kInformative, Arm::kNonInformative};
  std::vector<int> budgets = {20, 40, 60, 80};
  int prior_budget = 40;
  int iterations = 1;
  int seeds = 1;
  double observation_noise = 0.01;  // fraction of the plant's residual scale
  trajgen::SelectionConfig selection;
  int correlate_candidates = 5;
  int correlate_budget = 40;
  std::string correlate_metric = "test_set";
  int correlate_test_rollouts = 5;
  std::uint64_t master_seed = 0;

  void validate() const;
  /// Every resolved parameter, defaults included.
  KeyValue to_kv() const;
  static ExperimentConfig from_kv(const KeyValue& kv);
};

/// Kernel initialisation and bounds for a plant, scaled by its residual scale
/// and by the input range of the task under the nominal model.
struct KernelSetup {
  std::vector<gp::Kernel> init;
  gp::KernelBounds bounds;
};

KernelSetup kernel_setup(const ExperimentConfig& config, const systems::Plant& plant,
                         const MatrixXd& task);

}  // namespace infotraj::pipeline

#endif  // INFOTRAJ_PIPELINE_CONFIG_HPP_
