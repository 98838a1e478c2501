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


#include "infotraj/systems/plant.hpp"

#include <cmath>

namespace infotraj::systems {

HiddenAccess verification_access() { return HiddenAccess(); }

namespace {

constexpr std::uint64_t kOadiTag = 0x6f616469;
constexpr std::uint64_t kAttitudeTag = 0x61747433;

double spectral_norm(const MatrixXd& m) {
  return Eigen::JacobiSVD<MatrixXd>(m).singularValues()(0);
}

void write_box(KeyValue& kv, const std::string& prefix, const Box& box) {
  kv.set(prefix + "_lower", box.lower);
  kv.set(prefix + "_upper", box.upper);
}

Box read_box(const KeyValue& kv, const std::string& prefix) {
  return make_box(kv.get_vector(prefix + "_lower"), kv.get_vector(prefix + "_upper"));
}

}  // namespace

Plant Plant::linear(std::string name, std::uint64_t seed, double sampling_time,
                    LinearParams params, Box state_bounds, Box input_bounds,
                    double residual_scale) {
  const Eigen::Index n = params.A.rows();
  require(params.A.cols() == n, "linear plant: A must be square");
  require(params.B_nom.rows() == n && params.B_nom.cols() >= n,
          "linear plant: B_nom must be n x m with m >= n");
  require(params.B_dist.rows() == n && params.B_dist.cols() == params.B_nom.cols(),
          "linear plant: B_dist must match B_nom");
  require(params.D_dist.size() == n, "linear plant: D_dist must have n entries");
  require(state_bounds.dim() == n && input_bounds.dim() == n, "linear plant: bounds dimension");
  Plant p;
  p.name_ = std::move(name);
  p.seed_ = seed;
  p.sampling_time_ = sampling_time;
  p.state_bounds_ = std::move(state_bounds);
  p.input_bounds_ = std::move(input_bounds);
  p.residual_scale_ = residual_scale;
  p.params_ = std::move(params);
  p.finish();
  return p;
}

Plant Plant::attitude3(std::uint64_t seed, double sampling_time, Attitude3Params params,
                       Box state_bounds, Box input_bounds) {
  require(params.frequencies.cols() == 3 && params.frequencies.rows() % 3 == 0 &&
              params.frequencies.rows() > 0,
          "attitude3: frequencies must be 3F x 3");
  require(params.phases.size() == params.frequencies.rows() &&
              params.weights.size() == params.frequencies.rows(),
          "attitude3: phases and weights must have 3F entries");
  require(params.residual_scale >= 0.0 && params.feature_lengthscale > 0.0,
          "attitude3: bad residual scale or lengthscale");
  require(state_bounds.dim() == 3 && input_bounds.dim() == 3, "attitude3: bounds dimension");
  Plant p;
  p.name_ = "attitude3";
  p.seed_ = seed;
  p.sampling_time_ = sampling_time;
  p.state_bounds_ = std::move(state_bounds);
  p.input_bounds_ = std::move(input_bounds);
  p.residual_scale_ = sampling_time * params.residual_scale;
  p.params_ = std::move(params);
  p.finish();
  return p;
}

void Plant::finish() {
  require(sampling_time_ > 0.0, "plant: sampling time must be positive");
  const Eigen::Index n = state_bounds_.dim();
  if (const auto* lin = std::get_if<LinearParams>(&params_)) {
    input_matrix_ = MatrixXd::Identity(n, n);
    const MatrixXd& b = lin->B_nom;
    const MatrixXd gram = b * b.transpose();
    require(gram.fullPivLu().rank() == n, "linear plant: B_nom must have full row rank");
    allocation_ = b.transpose() * gram.inverse();
    MatrixXd stacked(n, 2 * n);
    stacked << lin->A, input_matrix_;
    lipschitz_ = spectral_norm(stacked);
  } else {
    input_matrix_ = sampling_time_ * MatrixXd::Identity(n, n);
    allocation_ = MatrixXd::Identity(n, n);
    MatrixXd stacked(n, 2 * n);
    stacked << MatrixXd::Identity(n, n), input_matrix_;
    lipschitz_ = spectral_norm(stacked);
  }
  input_matrix_inverse_ = input_matrix_.inverse();
}

int Plant::actuator_dim() const { return static_cast<int>(allocation_.rows()); }

VectorXd Plant::drift(const VectorXd& x) const {
  require(x.size() == state_dim(), "plant: state dimension mismatch");
  if (const auto* lin = std::get_if<LinearParams>(&params_)) return lin->A * x;
  return x;
}

VectorXd Plant::nominal(const VectorXd& x, const VectorXd& w) const {
  require(w.size() == input_dim(), "plant: input dimension mismatch");
  return drift(x) + input_matrix_ * w;
}

VectorXd Plant::allocate(const VectorXd& w) const {
  require(w.size() == input_dim(), "plant: input dimension mismatch");
  return allocation_ * w;
}

VectorXd Plant::true_residual(const VectorXd& x, const VectorXd& w, HiddenAccess) const {
  require(x.size() == state_dim() && w.size() == input_dim(), "plant: dimension mismatch");
  if (const auto* lin = std::get_if<LinearParams>(&params_)) {
    return lin->B_dist * (allocation_ * w) + lin->D_dist;
  }
  const auto& att = std::get<Attitude3Params>(params_);
  const Eigen::Index features = att.frequencies.rows() / 3;
  const double norm = std::sqrt(2.0 / static_cast<double>(features));
  VectorXd g(3);
  for (Eigen::Index c = 0; c < 3; ++c) {
    double s = 0.0;
    for (Eigen::Index j = c * features; j < (c + 1) * features; ++j) {
      const double arg = att.frequencies.row(j).dot(w) / att.feature_lengthscale + att.phases(j);
      s += att.weights(j) * std::cos(arg);
    }
    g(c) = att.residual_scale * std::tanh(norm * s);
  }
  return sampling_time_ * g;
}

VectorXd Plant::step_actuators(const VectorXd& x, const VectorXd& u, HiddenAccess) const {
  const auto* lin = std::get_if<LinearParams>(&params_);
  require(lin != nullptr, "step_actuators: linear plants only");
  require(u.size() == lin->B_nom.cols(), "step_actuators: actuator dimension mismatch");
  return lin->A * x + (lin->B_nom + lin->B_dist) * u + lin->D_dist;
}

const LinearParams& Plant::linear_params(HiddenAccess) const {
  const auto* lin = std::get_if<LinearParams>(&params_);
  require(lin != nullptr, "plant is not linear");
  return *lin;
}

const Attitude3Params& Plant::attitude3_params(HiddenAccess) const {
  const auto* att = std::get_if<Attitude3Params>(&params_);
  require(att != nullptr, "plant is not attitude3");
  return *att;
}

KeyValue Plant::to_kv() const {
  KeyValue kv;
  kv.set("plant", name_);
  kv.set("seed", std::to_string(seed_));
  kv.set("sampling_time", sampling_time_);
  write_box(kv, "state", state_bounds_);
  write_box(kv, "input", input_bounds_);
  if (const auto* lin = std::get_if<LinearParams>(&params_)) {
    kv.set("kind", "linear");
    kv.set("residual_scale", residual_scale_);
    kv.set("A", lin->A);
    kv.set("B_nom", lin->B_nom);
    kv.set("B_dist", lin->B_dist);
    kv.set("D_dist", MatrixXd(lin->D_dist));
  } else {
    const auto& att = std::get<Attitude3Params>(params_);
    kv.set("kind", "attitude3");
    kv.set("residual_scale", att.residual_scale);
    kv.set("feature_lengthscale", att.feature_lengthscale);
    kv.set("rff_frequencies", att.frequencies);
    kv.set("rff_phases", MatrixXd(att.phases));
    kv.set("rff_weights", MatrixXd(att.weights));
  }
  return kv;
}

Plant Plant::from_kv(const KeyValue& kv) {
  const std::uint64_t seed = std::stoull(kv.get("seed"));
  const double t = kv.get_double("sampling_time");
  const Box xb = read_box(kv, "state");
  const Box ub = read_box(kv, "input");
  const std::string kind = kv.get("kind");
  if (kind == "linear") {
    LinearParams p{kv.get_matrix("A"), kv.get_matrix("B_nom"), kv.get_matrix("B_dist"),
                   kv.get_matrix("D_dist").col(0)};
    return linear(kv.get("plant"), seed, t, std::move(p), xb, ub, kv.get_double("residual_scale"));
  }
  if (kind == "attitude3") {
    Attitude3Params p;
    p.residual_scale = kv.get_double("residual_scale");
    p.feature_lengthscale = kv.get_double("feature_lengthscale");
    p.frequencies = kv.get_matrix("rff_frequencies");
    p.phases = kv.get_matrix("rff_phases").col(0);
    p.weights = kv.get_matrix("rff_weights").col(0);
    return attitude3(seed, t, std::move(p), xb, ub);
  }
  throw ConfigError("kind", kv.line_of("kind"), "unknown plant kind '" + kind + "'");
}

VectorXd step_nominal(const Plant& plant, const VectorXd& x, const VectorXd& w,
                      const ResidualFn& g_hat) {
  VectorXd next = plant.nominal(x, w);
  if (g_hat) next += g_hat(x, w);
  if (!next.allFinite()) throw DivergenceError("step_nominal: non-finite state");
  return next;
}

SealedPlant::SealedPlant(const SealedPlant& other) : plant_(other.plant_) {
  counts_[0] = other.counts_[0].load();
  counts_[1] = other.counts_[1].load();
}

VectorXd SealedPlant::step(const VectorXd& x, const VectorXd& w, Access access) {
  counts_[static_cast<int>(access)].fetch_add(1);
  VectorXd next = plant_.nominal(x, w) + plant_.true_residual(x, w, HiddenAccess());
  if (!next.allFinite()) throw DivergenceError("plant '" + plant_.name() + "': non-finite state");
  return next;
}

VectorXd step_true(SealedPlant& plant, const VectorXd& x, const VectorXd& w) {
  return plant.step(x, w, Access::kExperiment);
}

namespace {

Plant make_oadi(std::uint64_t seed, const PlantOptions& options) {
  require(options.oadi_axes >= 1 && options.oadi_axes <= 2, "oadi: axes must be 1 or 2");
  const double t = options.sampling_time.value_or(0.01);
  const double r = options.residual_scale.value_or(1.0);
  require(t > 0.0 && r >= 0.0, "oadi: bad sampling time or residual scale");
  const Eigen::Index axes = options.oadi_axes;
  const Eigen::Index n = 2 * axes, m = 3 * axes;
  Rng rng(derive_seed(seed, kOadiTag));
  LinearParams p{MatrixXd::Zero(n, n), MatrixXd::Zero(n, m), MatrixXd::Zero(n, m),
                 VectorXd::Zero(n)};
  VectorXd xmax(n), wmax(n);
  for (Eigen::Index a = 0; a < axes; ++a) {
    p.A.block(2 * a, 2 * a, 2, 2) << 1.0, t, 0.0, 1.0;
    // Three actuators per axis; the third acts on both position and velocity.
    p.B_nom.block(2 * a, 3 * a, 2, 3) << t, 0.0, 0.5 * t, 0.0, t, 0.5 * t;
    for (Eigen::Index i = 0; i < 2; ++i) {
      for (Eigen::Index j = 0; j < 3; ++j) {
        p.B_dist(2 * a + i, 3 * a + j) = t * r * rng.uniform(-0.15, 0.15);
      }
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      p.D_dist(2 * a + i) = sign * t * r * rng.uniform(1.0, 2.0);
    }
    xmax.segment(2 * a, 2) << 5.0, 10.0;
    wmax.segment(2 * a, 2) << 0.5, 0.5;
  }
  return Plant::linear("oadi", seed, t, std::move(p), make_box(-xmax, xmax), make_box(-wmax, wmax),
                       t * r);
}

Plant make_attitude3(std::uint64_t seed, const PlantOptions& options) {
  const double t = options.sampling_time.value_or(0.01);
  constexpr Eigen::Index kFeatures = 20;
  Attitude3Params p;
  p.residual_scale = options.residual_scale.value_or(0.5);
  p.feature_lengthscale = 1.5;
  Rng rng(derive_seed(seed, kAttitudeTag));
  p.frequencies.resize(3 * kFeatures, 3);
  p.phases.resize(3 * kFeatures);
  p.weights.resize(3 * kFeatures);
  for (Eigen::Index j = 0; j < 3 * kFeatures; ++j) {
    for (Eigen::Index d = 0; d < 3; ++d) p.frequencies(j, d) = rng.normal();
    p.phases(j) = rng.uniform(0.0, 2.0 * M_PI);
    p.weights(j) = rng.normal();
  }
  return Plant::attitude3(seed, t, std::move(p), make_box(VectorXd::Constant(3, -4.0), VectorXd::Constant(3, 4.0)),
                          make_box(VectorXd::Constant(3, -8.0), VectorXd::Constant(3, 8.0)));
}

}  // namespace

Plant builtin(const std::string& name, std::uint64_t seed, const PlantOptions& options) {
  if (name == "oadi") return make_oadi(seed, options);
  if (name == "attitude3") return make_attitude3(seed, options);
  throw InputError("unknown plant '" + name + "' (expected oadi or attitude3)");
}

}  // namespace infotraj::systems
