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


// Model-based tracking policy for input-affine plants h(x, w) = l(x) + B w:
//
//   x*  = x + (x_ref[k+1] - x_ref[k]) + K (x_ref[k] - x) + K_I s[k]
//   w   = argmin || x* - l(x) - B w - g_hat(w) ||
//
// where s[k] is the clamped running sum of x_ref - x. With a perfect model the
// closed-loop error obeys e[k+1] = (I - K) e[k] - K_I s[k], so a trajectory
// that starts on the reference stays on it.

#ifndef INFOTRAJ_CONTROL_CONTROLLER_HPP_
#define INFOTRAJ_CONTROL_CONTROLLER_HPP_

#include <functional>
#include <vector>

#include "infotraj/common.hpp"
#include "infotraj/kv.hpp"
#include "infotraj/systems/plant.hpp"

namespace infotraj::control {

struct SolveOptions {
  int max_iterations = 50;
  double tolerance = 1e-10;  // on the objective, state units
  double damping = 1.0;      // initial step lambda in (0, 1]
};

struct ControllerGains {
  MatrixXd K;
  MatrixXd K_I;
  VectorXd integral_clamp;  // per component, symmetric box
  SolveOptions solve;

  void validate() const;
  /// Keys: K, K_I, integral_clamp, max_iterations, tolerance, damping.
  KeyValue to_kv() const;
  static ControllerGains from_kv(const KeyValue& kv, const std::string& prefix = "");
};

/// Diagonal gains used by the built-in plants.
ControllerGains default_gains(const systems::Plant& plant);

/// Residual estimate as a function of the input only (state held fixed).
using InputResidualFn = std::function<VectorXd(const VectorXd& w)>;

struct CompensationResult {
  VectorXd input;
  double residual = 0.0;  // objective at the returned input
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;  // accepted iterates, starting value first
};

/// Damped fixed point w <- (1 - lambda) w + lambda B^-1 (target - g_hat(w)),
/// with lambda halved until the objective ||target - B w - g_hat(w)|| drops.
/// Starts from B^-1 target, the exact answer when g_hat is zero.
CompensationResult compensate(const VectorXd& target, const MatrixXd& B,
                              const InputResidualFn& g_hat, const SolveOptions& options);

VectorXd desired_state(const ControllerGains& gains, const VectorXd& integral,
                       const VectorXd& x_ref, const VectorXd& x_ref_next, const VectorXd& x);

/// One policy evaluation. `g_hat` may be empty (no compensation).
CompensationResult policy(const ControllerGains& gains, const VectorXd& integral,
                          const VectorXd& x_ref, const VectorXd& x_ref_next, const VectorXd& x,
                          const systems::Plant& plant, const systems::ResidualFn& g_hat);

/// s + (x_ref - x), clamped componentwise.
VectorXd update_integral(const ControllerGains& gains, const VectorXd& integral,
                         const VectorXd& x_ref, const VectorXd& x);

}  // namespace infotraj::control

#endif  // INFOTRAJ_CONTROL_CONTROLLER_HPP_
