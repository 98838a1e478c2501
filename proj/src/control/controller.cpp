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


#include "infotraj/control/controller.hpp"

namespace infotraj::control {

void ControllerGains::validate() const {
  const Eigen::Index n = K.rows();
  require(n > 0 && K.cols() == n, "gains: K must be square");
  require(K_I.rows() == n && K_I.cols() == n, "gains: K_I must match K");
  require(integral_clamp.size() == n && (integral_clamp.array() >= 0.0).all(),
          "gains: integral_clamp must be non-negative with n entries");
  require((K - K.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + K.cwiseAbs().maxCoeff()),
          "gains: K must be symmetric");
  require(K.llt().info() == Eigen::Success, "gains: K must be positive definite");
  const Eigen::SelfAdjointEigenSolver<MatrixXd> ki(0.5 * (K_I + K_I.transpose()));
  require(ki.eigenvalues().minCoeff() >= -1e-12, "gains: K_I must be positive semidefinite");
  require(solve.max_iterations >= 1, "gains: max_iterations must be positive");
  require(solve.tolerance > 0.0, "gains: tolerance must be positive");
  require(solve.damping > 0.0 && solve.damping <= 1.0, "gains: damping must be in (0, 1]");
}

KeyValue ControllerGains::to_kv() const {
  KeyValue kv;
  kv.set("K", K);
  kv.set("K_I", K_I);
  kv.set("integral_clamp", integral_clamp);
  kv.set("max_iterations", solve.max_iterations);
  kv.set("tolerance", solve.tolerance);
  kv.set("damping", solve.damping);
  return kv;
}

ControllerGains ControllerGains::from_kv(const KeyValue& kv, const std::string& prefix) {
  ControllerGains g;
  g.K = kv.get_matrix(prefix + "K");
  g.K_I = kv.get_matrix(prefix + "K_I");
  g.integral_clamp = kv.get_vector(prefix + "integral_clamp");
  g.solve.max_iterations = static_cast<int>(kv.get_int_or(prefix + "max_iterations", 50));
  g.solve.tolerance = kv.get_double_or(prefix + "tolerance", 1e-10);
  g.solve.damping = kv.get_double_or(prefix + "damping", 1.0);
  g.validate();
  return g;
}

ControllerGains default_gains(const systems::Plant& plant) {
  const Eigen::Index n = plant.state_dim();
  ControllerGains g;
  g.K = 0.2 * MatrixXd::Identity(n, n);
  if (plant.name() == "attitude3") {
    g.K_I = 0.01 * MatrixXd::Identity(n, n);
    g.integral_clamp = VectorXd::Constant(n, 5.0);
  } else {
    // No integral action, so an unmodelled constant offset stays visible.
    g.K_I = MatrixXd::Zero(n, n);
    g.integral_clamp = VectorXd::Constant(n, 10.0);
  }
  return g;
}

CompensationResult compensate(const VectorXd& target, const MatrixXd& B,
                              const InputResidualFn& g_hat, const SolveOptions& options) {
  const auto lu = B.partialPivLu();
  CompensationResult r;
  r.input = lu.solve(target);
  if (!g_hat) {
    r.residual = (target - B * r.input).norm();
    r.converged = true;
    r.objective_history.push_back(r.residual);
    return r;
  }
  VectorXd g = g_hat(r.input);
  double objective = (target - B * r.input - g).norm();
  r.objective_history.push_back(objective);
  while (objective > options.tolerance && r.iterations < options.max_iterations) {
    ++r.iterations;
    const VectorXd fixed_point = lu.solve(target - g);
    double lambda = options.damping;
    bool accepted = false;
    while (lambda >= 1e-6) {
      const VectorXd trial = (1.0 - lambda) * r.input + lambda * fixed_point;
      const VectorXd trial_g = g_hat(trial);
      const double trial_objective = (target - B * trial - trial_g).norm();
      if (trial_objective < objective) {
        r.input = trial;
        g = trial_g;
        objective = trial_objective;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
    r.objective_history.push_back(objective);
  }
  r.residual = objective;
  r.converged = objective <= options.tolerance;
  return r;
}

VectorXd desired_state(const ControllerGains& gains, const VectorXd& integral,
                       const VectorXd& x_ref, const VectorXd& x_ref_next, const VectorXd& x) {
  return x + (x_ref_next - x_ref) + gains.K * (x_ref - x) + gains.K_I * integral;
}

CompensationResult policy(const ControllerGains& gains, const VectorXd& integral,
                          const VectorXd& x_ref, const VectorXd& x_ref_next, const VectorXd& x,
                          const systems::Plant& plant, const systems::ResidualFn& g_hat) {
  const VectorXd target = desired_state(gains, integral, x_ref, x_ref_next, x) - plant.drift(x);
  InputResidualFn input_fn;
  if (g_hat) input_fn = [&](const VectorXd& w) { return g_hat(x, w); };
  return compensate(target, plant.input_matrix(), input_fn, gains.solve);
}

VectorXd update_integral(const ControllerGains& gains, const VectorXd& integral,
                         const VectorXd& x_ref, const VectorXd& x) {
  const VectorXd s = integral + (x_ref - x);
  return s.cwiseMax(-gains.integral_clamp).cwiseMin(gains.integral_clamp);
}

}  // namespace infotraj::control
