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


#include "infotraj/pipeline/config.hpp"

#include <algorithm>
#include <set>

namespace infotraj::pipeline {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "plant.name", "plant.seed", "plant.residual_scale", "plant.sampling_time", "plant.oadi_axes",
      "task.amplitude", "task.period", "task.horizon", "eval.scale",
      "controller.K", "controller.K_I", "controller.integral_clamp", "controller.max_iterations",
      "controller.tolerance", "controller.damping",
      "gp.features", "gp.sample_mode", "gp.signal_variance", "gp.lengthscale", "gp.noise_variance",
      "fit.enabled", "fit.restarts", "fit.max_evaluations",
      "experiment.arms", "experiment.budgets", "experiment.prior_budget", "experiment.iterations",
      "experiment.seeds", "experiment.observation_noise",
      "selection.candidates", "selection.belief_rollouts", "selection.subsample",
      "selection.eval_points", "selection.amplitude_fraction", "selection.f_max", "selection.tones",
      "selection.include_task", "selection.anchors",
      "region.rollouts", "region.grid_size", "region.epsilon",
      "correlate.candidates", "correlate.budget", "correlate.metric", "correlate.test_rollouts", "run.seed"};
  return keys;
}

int get_int_field(const KeyValue& kv, const std::string& key, int fallback) {
  return static_cast<int>(kv.get_int_or(key, fallback));
}

std::uint64_t get_seed(const KeyValue& kv, const std::string& key) {
  try {
    std::size_t used = 0;
    const std::string& text = kv.get(key);
    // stoull silently wraps negative input.
    if (text.empty() || text.front() < '0' || text.front() > '9') throw std::invalid_argument(text);
    const std::uint64_t v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError(key, kv.line_of(key), "expected a non-negative integer");
  }
}

}  // namespace

Arm parse_arm(const std::string& name) {
  if (name == "informative") return Arm::kInformative;
  if (name == "non_informative") return Arm::kNonInformative;
  if (name == "no_learning") return Arm::kNoLearning;
  throw InputError("unknown arm '" + name + "' (informative, non_informative, no_learning)");
}

std::string to_string(Arm arm) {
  switch (arm) {
    case Arm::kInformative:
      return "informative";
    case Arm::kNonInformative:
      return "non_informative";
    case Arm::kNoLearning:
      return "no_learning";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (plant.empty()) throw ConfigError("plant.name", 0, "missing required key");
  if (plant != "oadi" && plant != "attitude3") {
    throw ConfigError("plant.name", 0, "unknown plant '" + plant + "'");
  }
  require(!arms.empty(), "config: experiment.arms is empty");
  require(!budgets.empty(), "config: experiment.budgets is empty");
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    require(budgets[i] >= 1, "config: budgets must be positive");
    require(i == 0 || budgets[i] > budgets[i - 1], "config: budgets must be strictly increasing");
  }
  require(prior_budget >= 1, "config: experiment.prior_budget must be positive");
  require(iterations >= 1, "config: experiment.iterations must be at least 1");
  require(seeds >= 1, "config: experiment.seeds must be at least 1");
  require(observation_noise >= 0.0, "config: experiment.observation_noise must be non-negative");
  require(eval_scale > 0.0, "config: eval.scale must be positive");
  require(selection.candidates >= 1 && selection.belief_rollouts >= 1 && selection.subsample >= 1 &&
              selection.eval_points >= 1 && selection.anchors >= 1,
          "config: selection counts must be positive");
  require(selection.region.rollouts >= 1 && selection.region.grid_size >= 1,
          "config: region counts must be positive");
  require(correlate_candidates >= 1 && correlate_budget >= 1 && correlate_test_rollouts >= 1,
          "config: correlate counts must be positive");
  if (correlate_metric != "test_set" && correlate_metric != "closed_loop") {
    throw ConfigError("correlate.metric", 0, "expected test_set or closed_loop");
  }
  require(fit.restarts >= 1 && fit.max_evaluations >= 1, "config: fit counts must be positive");
  if (gains) gains->validate();
}

KeyValue ExperimentConfig::to_kv() const {
  KeyValue kv;
  kv.set("plant.name", plant);
  if (plant_seed) kv.set("plant.seed", std::to_string(*plant_seed));
  if (plant_options.residual_scale) kv.set("plant.residual_scale", *plant_options.residual_scale);
  if (plant_options.sampling_time) kv.set("plant.sampling_time", *plant_options.sampling_time);
  kv.set("plant.oadi_axes", plant_options.oadi_axes);
  if (task.amplitude) kv.set("task.amplitude", *task.amplitude);
  if (task.period) kv.set("task.period", *task.period);
  if (task.horizon) kv.set("task.horizon", *task.horizon);
  kv.set("eval.scale", eval_scale);
  if (gains) {
    kv.set("controller.K", gains->K);
    kv.set("controller.K_I", gains->K_I);
    kv.set("controller.integral_clamp", gains->integral_clamp);
    kv.set("controller.max_iterations", gains->solve.max_iterations);
    kv.set("controller.tolerance", gains->solve.tolerance);
    kv.set("controller.damping", gains->solve.damping);
  }
  kv.set("gp.features", gp::to_string(features));
  kv.set("gp.sample_mode", sample_mode == gp::SampleMode::kJointAnchors ? "joint" : "pointwise");
  if (kernel.signal_variance) kv.set("gp.signal_variance", *kernel.signal_variance);
  if (kernel.lengthscale) kv.set("gp.lengthscale", *kernel.lengthscale);
  if (kernel.noise_variance) kv.set("gp.noise_variance", *kernel.noise_variance);
  kv.set("fit.enabled", fit_enabled ? "true" : "false");
  kv.set("fit.restarts", fit.restarts);
  kv.set("fit.max_evaluations", fit.max_evaluations);
  std::string arm_list;
  for (std::size_t i = 0; i < arms.size(); ++i) arm_list += (i ? "," : "") + to_string(arms[i]);
  kv.set("experiment.arms", arm_list);
  std::string budget_list;
  for (std::size_t i = 0; i < budgets.size(); ++i) budget_list += (i ? "," : "") + std::to_string(budgets[i]);
  kv.set("experiment.budgets", budget_list);
  kv.set("experiment.prior_budget", prior_budget);
  kv.set("experiment.iterations", iterations);
  kv.set("experiment.seeds", seeds);
  kv.set("experiment.observation_noise", observation_noise);
  kv.set("selection.candidates", selection.candidates);
  kv.set("selection.belief_rollouts", selection.belief_rollouts);
  kv.set("selection.subsample", selection.subsample);
  kv.set("selection.eval_points", selection.eval_points);
  kv.set("selection.amplitude_fraction", selection.amplitude_fraction);
  kv.set("selection.f_max", selection.f_max);
  kv.set("selection.tones", selection.tones);
  kv.set("selection.include_task", selection.include_task ? "true" : "false");
  kv.set("selection.anchors", selection.anchors);
  kv.set("region.rollouts", selection.region.rollouts);
  kv.set("region.grid_size", selection.region.grid_size);
  if (selection.region.epsilon) kv.set("region.epsilon", *selection.region.epsilon);
  kv.set("correlate.candidates", correlate_candidates);
  kv.set("correlate.budget", correlate_budget);
  kv.set("correlate.metric", correlate_metric);
  kv.set("correlate.test_rollouts", correlate_test_rollouts);
  kv.set("run.seed", std::to_string(master_seed));
  return kv;
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValue& kv) {
  for (const auto& key : kv.keys()) {
    if (!known_keys().count(key)) throw ConfigError(key, kv.line_of(key), "unknown key");
  }
  ExperimentConfig c;
  if (!kv.has("plant.name")) throw ConfigError("plant.name", 0, "missing required key");
  c.plant = kv.get("plant.name");
  if (c.plant != "oadi" && c.plant != "attitude3") {
    throw ConfigError("plant.name", kv.line_of("plant.name"), "unknown plant '" + c.plant + "'");
  }
  if (kv.has("plant.seed")) c.plant_seed = get_seed(kv, "plant.seed");
  if (kv.has("plant.residual_scale")) c.plant_options.residual_scale = kv.get_double("plant.residual_scale");
  if (kv.has("plant.sampling_time")) c.plant_options.sampling_time = kv.get_double("plant.sampling_time");
  c.plant_options.oadi_axes = get_int_field(kv, "plant.oadi_axes", 1);
  if (kv.has("task.amplitude")) c.task.amplitude = kv.get_double("task.amplitude");
  if (kv.has("task.period")) c.task.period = kv.get_double("task.period");
  if (kv.has("task.horizon")) c.task.horizon = get_int_field(kv, "task.horizon", 0);
  c.eval_scale = kv.get_double_or("eval.scale", 1.0);
  if (kv.has("controller.K")) c.gains = control::ControllerGains::from_kv(kv, "controller.");
  try {
    c.features = gp::parse_feature_mode(kv.get_or("gp.features", "input"));
    c.sample_mode = gp::parse_sample_mode(kv.get_or("gp.sample_mode", "joint"));
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    const std::string key = kv.has("gp.features") ? "gp.features" : "gp.sample_mode";
    throw ConfigError(key, kv.line_of(key), e.what());
  }
  if (kv.has("gp.signal_variance")) c.kernel.signal_variance = kv.get_double("gp.signal_variance");
  if (kv.has("gp.lengthscale")) c.kernel.lengthscale = kv.get_vector("gp.lengthscale");
  if (kv.has("gp.noise_variance")) c.kernel.noise_variance = kv.get_double("gp.noise_variance");
  c.fit_enabled = kv.get_bool_or("fit.enabled", true);
  c.fit.restarts = get_int_field(kv, "fit.restarts", c.fit.restarts);
  c.fit.max_evaluations = get_int_field(kv, "fit.max_evaluations", c.fit.max_evaluations);
  if (kv.has("experiment.arms")) {
    c.arms.clear();
    for (const auto& name : kv.get_list("experiment.arms")) {
      try {
        c.arms.push_back(parse_arm(name));
      } catch (const InputError& e) {
        throw ConfigError("experiment.arms", kv.line_of("experiment.arms"), e.what());
      }
    }
  }
  if (kv.has("experiment.budgets")) {
    c.budgets.clear();
    for (auto b : kv.get_int_list("experiment.budgets")) c.budgets.push_back(static_cast<int>(b));
  }
  c.prior_budget = get_int_field(kv, "experiment.prior_budget", c.prior_budget);
  c.iterations = get_int_field(kv, "experiment.iterations", c.iterations);
  c.seeds = get_int_field(kv, "experiment.seeds", c.seeds);
  c.observation_noise = kv.get_double_or("experiment.observation_noise", c.observation_noise);
  auto& s = c.selection;
  s.candidates = get_int_field(kv, "selection.candidates", s.candidates);
  s.belief_rollouts = get_int_field(kv, "selection.belief_rollouts", s.belief_rollouts);
  s.subsample = get_int_field(kv, "selection.subsample", s.subsample);
  s.eval_points = get_int_field(kv, "selection.eval_points", s.eval_points);
  s.amplitude_fraction = kv.get_double_or("selection.amplitude_fraction", s.amplitude_fraction);
  s.f_max = kv.get_double_or("selection.f_max", s.f_max);
  s.tones = get_int_field(kv, "selection.tones", s.tones);
  s.include_task = kv.get_bool_or("selection.include_task", s.include_task);
  s.anchors = get_int_field(kv, "selection.anchors", s.anchors);
  s.region.rollouts = get_int_field(kv, "region.rollouts", s.region.rollouts);
  s.region.grid_size = get_int_field(kv, "region.grid_size", s.region.grid_size);
  if (kv.has("region.epsilon")) s.region.epsilon = kv.get_double("region.epsilon");
  s.sample_mode = c.sample_mode;
  c.correlate_candidates = get_int_field(kv, "correlate.candidates", c.correlate_candidates);
  c.correlate_budget = get_int_field(kv, "correlate.budget", c.correlate_budget);
  c.correlate_metric = kv.get_or("correlate.metric", c.correlate_metric);
  if (c.correlate_metric != "test_set" && c.correlate_metric != "closed_loop") {
    throw ConfigError("correlate.metric", kv.line_of("correlate.metric"), "expected test_set or closed_loop");
  }
  c.correlate_test_rollouts = get_int_field(kv, "correlate.test_rollouts", c.correlate_test_rollouts);
  if (kv.has("run.seed")) c.master_seed = get_seed(kv, "run.seed");
  try {
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    throw ConfigError("", 0, e.what());
  }
  return c;
}

KernelSetup kernel_setup(const ExperimentConfig& config, const systems::Plant& plant,
                         const MatrixXd& task) {
  const gp::FeatureMap features{config.features, plant.state_dim(), plant.input_dim()};
  const Eigen::Index d = features.dim();
  // Feature ranges along the task under the nominal model (no plant access).
  const MatrixXd b_inv = plant.input_matrix().inverse();
  MatrixXd z(task.rows(), d);
  for (Eigen::Index k = 0; k < task.rows(); ++k) {
    const VectorXd x = task.row(k).transpose();
    const VectorXd next = task.row(std::min<Eigen::Index>(k + 1, task.rows() - 1)).transpose();
    z.row(k) = features(x, b_inv * (next - plant.drift(x))).transpose();
  }
  VectorXd range = (z.colwise().maxCoeff() - z.colwise().minCoeff()).transpose();
  const double largest = range.maxCoeff() > 0.0 ? range.maxCoeff() : 1.0;
  range = range.cwiseMax(0.1 * largest);

  const double scale = plant.residual_scale() > 0.0 ? plant.residual_scale() : 1.0;
  const double sf2 = config.kernel.signal_variance.value_or(scale * scale);
  VectorXd ell = 0.5 * range;
  if (config.kernel.lengthscale) {
    const VectorXd& given = *config.kernel.lengthscale;
    require(given.size() == 1 || given.size() == d, "config: gp.lengthscale needs 1 or d entries");
    ell = given.size() == 1 ? VectorXd::Constant(d, given(0)) : given;
  }
  const double noise = config.kernel.noise_variance.value_or(
      std::max(1e-4, config.observation_noise * config.observation_noise) * scale * scale);

  KernelSetup setup;
  gp::Kernel kernel;
  kernel.signal_variance = sf2;
  kernel.lengthscales = ell;
  kernel.noise_variance = noise;
  kernel.validate();
  setup.init.assign(static_cast<std::size_t>(plant.state_dim()), kernel);
  setup.bounds.signal_variance_min = 1e-3 * scale * scale;
  setup.bounds.signal_variance_max = 1e2 * scale * scale;
  setup.bounds.lengthscale_min = ell.minCoeff() / 100.0;
  setup.bounds.lengthscale_max = 100.0 * ell.maxCoeff();
  setup.bounds.noise_variance_min = 1e-6 * scale * scale;
  setup.bounds.noise_variance_max = 0.1 * scale * scale;
  return setup;
}

}  // namespace infotraj::pipeline
