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


// Discrete-time plants x[k+1] = h(x, w) + g(x, w). The controller-facing
// input w has the state dimension and enters h affinely, h = l(x) + B w with B
// invertible. For the overactuated plant w is the net effect B_nom u_act of
// the actuator commands, and allocate() maps it back to actuators.
//
// g is the hidden residual. Only SealedPlant (the experiment interface) and
// holders of a HiddenAccess key can evaluate it.

#ifndef INFOTRAJ_SYSTEMS_PLANT_HPP_
#define INFOTRAJ_SYSTEMS_PLANT_HPP_

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "infotraj/common.hpp"
#include "infotraj/kv.hpp"

namespace infotraj::systems {

class SealedPlant;

class HiddenAccess {
 private:
  HiddenAccess() = default;
  friend class SealedPlant;
  friend HiddenAccess verification_access();
};

/// For oracles and tests only. Selection and pipeline code never calls this.
HiddenAccess verification_access();

struct LinearParams {
  MatrixXd A;       // n x n
  MatrixXd B_nom;   // n x m, full row rank, m >= n
  MatrixXd B_dist;  // n x m, hidden
  VectorXd D_dist;  // n, hidden
};

// g_tau(tau)_c = scale * tanh(sqrt(2/F) * sum_j w_cj cos(<f_cj, tau> / ell + p_cj))
struct Attitude3Params {
  double residual_scale = 0.5;       // torque units, bounds |g_tau| per axis
  double feature_lengthscale = 1.5;  // torque units
  MatrixXd frequencies;              // 3F x 3, rows for axis c at [cF, (c+1)F)
  VectorXd phases;                   // 3F
  VectorXd weights;                  // 3F
};

/// Residual estimate evaluated at (x, w), in state units.
using ResidualFn = std::function<VectorXd(const VectorXd& x, const VectorXd& w)>;

class Plant {
 public:
  Plant() = default;
  static Plant linear(std::string name, std::uint64_t seed, double sampling_time,
                      LinearParams params, Box state_bounds, Box input_bounds,
                      double residual_scale);
  static Plant attitude3(std::uint64_t seed, double sampling_time, Attitude3Params params,
                         Box state_bounds, Box input_bounds);

  const std::string& name() const { return name_; }
  std::uint64_t seed() const { return seed_; }
  int state_dim() const { return static_cast<int>(state_bounds_.dim()); }
  int input_dim() const { return state_dim(); }
  int actuator_dim() const;
  double sampling_time() const { return sampling_time_; }
  const Box& state_bounds() const { return state_bounds_; }
  const Box& input_bounds() const { return input_bounds_; }
  /// Expected residual magnitude in state units; a public modelling prior.
  double residual_scale() const { return residual_scale_; }
  /// Lipschitz constant of h on the bounds (spectral norm of [dl/dx, B]).
  double lipschitz() const { return lipschitz_; }
  bool is_linear() const { return std::holds_alternative<LinearParams>(params_); }

  VectorXd drift(const VectorXd& x) const;
  const MatrixXd& input_matrix() const { return input_matrix_; }
  VectorXd nominal(const VectorXd& x, const VectorXd& w) const;
  /// Actuator commands realizing the net input w (identity for attitude3).
  VectorXd allocate(const VectorXd& w) const;

  VectorXd true_residual(const VectorXd& x, const VectorXd& w, HiddenAccess) const;
  /// Linear plants only: A x + (B_nom + B_dist) u + D_dist in matrix form.
  VectorXd step_actuators(const VectorXd& x, const VectorXd& u, HiddenAccess) const;
  const LinearParams& linear_params(HiddenAccess) const;
  const Attitude3Params& attitude3_params(HiddenAccess) const;

  /// Full parameter dump (hidden parts included) for reproducibility.
  KeyValue to_kv() const;
  static Plant from_kv(const KeyValue& kv);

 private:
  void finish();

  std::string name_;
  std::uint64_t seed_ = 0;
  double sampling_time_ = 0.01;
  Box state_bounds_;
  Box input_bounds_;
  double residual_scale_ = 0.0;
  double lipschitz_ = 0.0;
  MatrixXd input_matrix_;
  MatrixXd input_matrix_inverse_;
  MatrixXd allocation_;
  std::variant<LinearParams, Attitude3Params> params_;
};

VectorXd step_nominal(const Plant& plant, const VectorXd& x, const VectorXd& w,
                      const ResidualFn& g_hat);

enum class Access { kExperiment = 0, kEvaluation = 1 };

/// The "real experiment": the only production path to the true dynamics.
/// Counts every step by access kind.
class SealedPlant {
 public:
  explicit SealedPlant(Plant plant) : plant_(std::move(plant)) {}
  SealedPlant(const SealedPlant& other);

  const Plant& plant() const { return plant_; }
  /// h + g at (x, w). Throws DivergenceError on a non-finite result.
  VectorXd step(const VectorXd& x, const VectorXd& w, Access access = Access::kExperiment);
  long long steps(Access access) const { return counts_[static_cast<int>(access)].load(); }
  long long total_steps() const { return steps(Access::kExperiment) + steps(Access::kEvaluation); }

 private:
  Plant plant_;
  std::atomic<long long> counts_[2] = {0, 0};
};

VectorXd step_true(SealedPlant& plant, const VectorXd& x, const VectorXd& w);

struct PlantOptions {
  std::optional<double> residual_scale;
  std::optional<double> sampling_time;
  int oadi_axes = 1;  // oadi state dimension is 2 per axis
};

/// Built-in synthetic plants: "oadi" (overactuated double integrator with an
/// actuator disturbance and a constant offset) and "attitude3" (3-axis
/// angular velocity with a smooth torque mismatch).
Plant builtin(const std::string& name, std::uint64_t seed, const PlantOptions& options = {});

}  // namespace infotraj::systems

#endif  // INFOTRAJ_SYSTEMS_PLANT_HPP_
