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


#include "infotraj/simulate/rollout.hpp"

#include <algorithm>
#include <cmath>

#include "infotraj/csv.hpp"

namespace infotraj::simulate {

namespace {
constexpr std::uint64_t kNoiseTag = 0x6e6f697365;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kExperiment:
      return "experiment";
    case Mode::kBelief:
      return "belief";
    case Mode::kEvaluation:
      return "evaluation";
  }
  return "unknown";
}

std::vector<gp::Dataset> RolloutResult::datasets() const {
  return gp::split_channels(features, targets, trajectory_ids);
}

std::string RolloutResult::to_csv() const {
  const Eigen::Index n = reference.cols();
  const Eigen::Index m = trajectory.inputs.cols();
  std::vector<std::string> header = {"k"};
  for (Eigen::Index j = 0; j < n; ++j) header.push_back("x_" + std::to_string(j));
  for (Eigen::Index j = 0; j < m; ++j) header.push_back("u_" + std::to_string(j));
  for (Eigen::Index j = 0; j < n; ++j) header.push_back("xref_" + std::to_string(j));
  header.push_back("err");
  CsvWriter csv(header);
  for (Eigen::Index k = 0; k < trajectory.states.rows(); ++k) {
    csv.cell(static_cast<long long>(k));
    for (Eigen::Index j = 0; j < n; ++j) csv.cell(trajectory.states(k, j));
    for (Eigen::Index j = 0; j < m; ++j) csv.cell(trajectory.inputs(k, j));
    for (Eigen::Index j = 0; j < n; ++j) csv.cell(reference(k, j));
    csv.cell(error(k));
    csv.end_row();
  }
  return csv.str();
}

KeyValue RolloutResult::metadata(double cost) const {
  KeyValue kv;
  kv.set("mode", to_string(mode));
  kv.set("seed", std::to_string(seed));
  kv.set("diverged", diverged ? "true" : "false");
  kv.set("plant_steps", plant_steps);
  kv.set("unconverged_solves", unconverged_solves);
  if (!std::isnan(cost)) kv.set("cost", cost);
  return kv;
}

systems::ResidualFn mean_residual(const gp::ResidualModel& model) {
  if (model.total_points() == 0) return {};
  return [&model](const VectorXd& x, const VectorXd& w) { return model.mean_at(x, w); };
}

RolloutResult closed_loop(const systems::Plant& plant, const control::ControllerGains& gains,
                          const systems::ResidualFn& g_hat, const gp::FeatureMap& features,
                          const MatrixXd& x_ref, const RolloutConfig& config, const StepFn& step) {
  const Eigen::Index n = plant.state_dim();
  require(x_ref.rows() >= 1 && x_ref.cols() == n, "rollout: reference must be (N+1) x n");
  require(x_ref.allFinite(), "rollout: non-finite reference");
  require(config.initial_offset.size() == 0 || config.initial_offset.size() == n,
          "rollout: initial offset dimension");
  const Eigen::Index rows = x_ref.rows();

  RolloutResult r;
  r.mode = config.mode;
  r.seed = config.seed;
  r.reference = x_ref;
  MatrixXd states(rows, n), inputs(rows, n);
  MatrixXd feats(rows, features.dim()), targets(rows, n);
  const VectorXd limit = config.divergence_factor *
                         plant.state_bounds().lower.cwiseAbs().cwiseMax(plant.state_bounds().upper.cwiseAbs());

  VectorXd x = x_ref.row(0).transpose();
  if (config.initial_offset.size() == n) x += config.initial_offset;
  VectorXd integral = VectorXd::Zero(n);
  Eigen::Index done = 0;
  for (Eigen::Index k = 0; k < rows; ++k) {
    const VectorXd ref = x_ref.row(k).transpose();
    const VectorXd ref_next = x_ref.row(std::min(k + 1, rows - 1)).transpose();
    integral = control::update_integral(gains, integral, ref, x);
    const auto solve = control::policy(gains, integral, ref, ref_next, x, plant, g_hat);
    if (!solve.converged) ++r.unconverged_solves;
    const VectorXd& w = solve.input;
    VectorXd next;
    bool ok = w.allFinite();
    if (ok) {
      try {
        next = step(x, w);
      } catch (const DivergenceError&) {
        ok = false;
      }
    }
    if (ok) ++r.plant_steps;
    ok = ok && next.allFinite() && (next.cwiseAbs().array() <= limit.array()).all();
    states.row(k) = x.transpose();
    inputs.row(k) = w.transpose();
    ++done;
    if (!ok) {
      r.diverged = true;
      break;
    }
    feats.row(k) = features(x, w).transpose();
    targets.row(k) = (next - plant.nominal(x, w)).transpose();
    x = next;
  }

  const Eigen::Index observed = r.diverged ? done - 1 : done;
  r.trajectory = systems::Trajectory(states.topRows(done), inputs.topRows(done), plant.sampling_time());
  r.error = (x_ref.topRows(done) - states.topRows(done)).rowwise().norm();
  r.features = feats.topRows(observed);
  r.clean_targets = targets.topRows(observed);
  r.targets = r.clean_targets;
  if (config.mode == Mode::kExperiment && config.observation_noise > 0.0) {
    Rng rng(derive_seed(config.seed, kNoiseTag));
    for (Eigen::Index i = 0; i < r.targets.rows(); ++i) {
      for (Eigen::Index j = 0; j < n; ++j) r.targets(i, j) += config.observation_noise * rng.normal();
    }
  }
  r.trajectory_ids.assign(static_cast<std::size_t>(observed), config.trajectory_id);
  return r;
}

RolloutResult rollout(systems::SealedPlant& plant, const control::ControllerGains& gains,
                      const gp::ResidualModel& model, const MatrixXd& x_ref,
                      const RolloutConfig& config) {
  require(config.mode != Mode::kBelief, "rollout: belief mode needs a residual sample");
  const auto access =
      config.mode == Mode::kEvaluation ? systems::Access::kEvaluation : systems::Access::kExperiment;
  return closed_loop(plant.plant(), gains, mean_residual(model), model.features(), x_ref, config,
                     [&](const VectorXd& x, const VectorXd& w) { return plant.step(x, w, access); });
}

RolloutResult rollout(const systems::Plant& plant, const control::ControllerGains& gains,
                      const gp::ResidualModel& model, const MatrixXd& x_ref,
                      gp::ResidualSample& sample, const RolloutConfig& config) {
  require(config.mode == Mode::kBelief, "rollout: a residual sample implies belief mode");
  const gp::FeatureMap& features = model.features();
  return closed_loop(plant, gains, mean_residual(model), features, x_ref, config,
                     [&](const VectorXd& x, const VectorXd& w) {
                       VectorXd next = plant.nominal(x, w) + sample(features(x, w));
                       if (!next.allFinite()) throw DivergenceError("belief rollout: non-finite state");
                       return next;
                     });
}

MatrixXd belief_anchors(const systems::Plant& plant, const control::ControllerGains& gains,
                        const gp::ResidualModel& model, const MatrixXd& x_ref, int count) {
  require(count >= 1, "belief_anchors: count must be positive");
  const systems::ResidualFn g_hat = mean_residual(model);
  RolloutConfig config;
  config.mode = Mode::kBelief;
  const RolloutResult r = closed_loop(plant, gains, g_hat, model.features(), x_ref, config,
                                      [&](const VectorXd& x, const VectorXd& w) {
                                        return step_nominal(plant, x, w, g_hat);
                                      });
  const Eigen::Index rows = r.features.rows();
  require(rows >= 1, "belief_anchors: mean-model rollout diverged immediately");
  const Eigen::Index picks = std::min<Eigen::Index>(count, rows);
  MatrixXd anchors(picks, r.features.cols());
  for (Eigen::Index i = 0; i < picks; ++i) {
    const Eigen::Index k = picks == 1 ? 0 : (i * (rows - 1)) / (picks - 1);
    anchors.row(i) = r.features.row(k);
  }
  return anchors;
}

RolloutResult belief_rollout(const systems::Plant& plant, const control::ControllerGains& gains,
                             const gp::ResidualModel& model, const MatrixXd& x_ref,
                             std::uint64_t seed, gp::SampleMode mode, int anchors) {
  const MatrixXd a = belief_anchors(plant, gains, model, x_ref, anchors);
  gp::ResidualSample sample = gp::sample_function(model, a, seed, mode);
  RolloutConfig config;
  config.mode = Mode::kBelief;
  config.seed = seed;
  return rollout(plant, gains, model, x_ref, sample, config);
}

TrackingMetrics tracking_error(const RolloutResult& result) {
  const Eigen::Index n = result.reference.cols();
  TrackingMetrics m;
  m.absolute = VectorXd::Zero(n);
  if (result.diverged) {
    m.diverged = true;
    m.squared = kInf;
    m.absolute.setConstant(kInf);
    return m;
  }
  const Eigen::Index rows = result.trajectory.states.rows();
  if (rows <= 1) return m;
  const MatrixXd e = result.reference.bottomRows(rows - 1) - result.trajectory.states.bottomRows(rows - 1);
  m.squared = e.rowwise().squaredNorm().sum();
  m.absolute = e.cwiseAbs().colwise().mean().transpose();
  return m;
}

CompensationCheck verify_compensation(const systems::Plant& plant,
                                     const control::ControllerGains& gains, const MatrixXd& x_ref,
                                     Compensation compensation) {
  const auto key = systems::verification_access();
  systems::ResidualFn truth = [&](const VectorXd& x, const VectorXd& w) {
    return plant.true_residual(x, w, key);
  };
  const gp::FeatureMap features{gp::FeatureMode::kInput, plant.state_dim(), plant.input_dim()};
  RolloutConfig config;
  const RolloutResult r =
      closed_loop(plant, gains, compensation == Compensation::kTrueResidual ? truth : nullptr,
                  features, x_ref, config, [&](const VectorXd& x, const VectorXd& w) -> VectorXd {
                    return plant.nominal(x, w) + truth(x, w);
                  });
  CompensationCheck report;
  report.diverged = r.diverged;
  report.unconverged_solves = r.unconverged_solves;
  const MatrixXd e = (x_ref.topRows(r.trajectory.states.rows()) - r.trajectory.states).cwiseAbs();
  const VectorXd inf_norm = e.rowwise().maxCoeff();
  report.max_error = r.diverged ? kInf : inf_norm.maxCoeff();
  const Eigen::Index tail = std::max<Eigen::Index>(1, inf_norm.size() / 4);
  report.steady_state_error = r.diverged ? kInf : inf_norm.tail(tail).mean();
  return report;
}

}  // namespace infotraj::simulate
