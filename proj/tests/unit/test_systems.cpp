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


#include <cmath>

#include "doctest.h"
#include "infotraj/control/controller.hpp"
#include "infotraj/gp/residual_model.hpp"
#include "infotraj/simulate/rollout.hpp"
#include "infotraj/systems/plant.hpp"
#include "infotraj/trajgen/tasks.hpp"

using namespace infotraj;
using namespace infotraj::systems;

namespace {

Plant unit_mass_double_integrator(double t) {
  LinearParams p{(MatrixXd(2, 2) << 1, t, 0, 1).finished(),
                 (MatrixXd(2, 2) << 0.5 * t * t, 0, t, 1).finished(), MatrixXd::Zero(2, 2),
                 VectorXd::Zero(2)};
  const Box b = make_box(VectorXd::Constant(2, -10), VectorXd::Constant(2, 10));
  return Plant::linear("di", 0, t, p, b, b, 0.0);
}

VectorXd random_vector(Rng& rng, Eigen::Index n, double scale) {
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(-scale, scale);
  return v;
}

}  // namespace

TEST_CASE("constant input on a unit-mass double integrator") {
  const double t = 0.1;
  const Plant di = unit_mass_double_integrator(t);
  // First actuator is the force; the second column only makes B_nom full rank.
  const VectorXd next = di.step_actuators(VectorXd::Zero(2), (VectorXd(2) << 1, 0).finished(),
                                          verification_access());
  CHECK(next(0) == doctest::Approx(0.5 * t * t));
  CHECK(next(1) == doctest::Approx(t));
}

TEST_CASE("oadi matches the direct matrix form") {
  const Plant p = builtin("oadi", 3);
  SealedPlant sealed(p);
  const auto key = verification_access();
  const LinearParams& lp = p.linear_params(key);
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const VectorXd x = random_vector(rng, 2, 2.0), w = random_vector(rng, 2, 0.3);
    const VectorXd u = p.allocate(w);
    const VectorXd direct = lp.A * x + (lp.B_nom + lp.B_dist) * u + lp.D_dist;
    CHECK((step_true(sealed, x, w) - direct).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((p.step_actuators(x, u, key) - direct).cwiseAbs().maxCoeff() < 1e-15);
  }
  CHECK(sealed.steps(Access::kExperiment) == 20);
  CHECK(sealed.steps(Access::kEvaluation) == 0);
}

TEST_CASE("oadi hidden structure: actuator disturbance and constant offset") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Plant p = builtin("oadi", seed);
    const LinearParams& lp = p.linear_params(verification_access());
    CHECK(p.actuator_dim() > p.state_dim());
    CHECK(lp.B_dist.cwiseAbs().maxCoeff() > 0.0);
    CHECK((lp.D_dist.array() != 0.0).all());
  }
  const Plant two = builtin("oadi", 1, {std::nullopt, std::nullopt, 2});
  CHECK(two.state_dim() == 4);
  CHECK(two.actuator_dim() == 6);
}

TEST_CASE("attitude3 equilibrium and residual bound") {
  PlantOptions no_residual;
  no_residual.residual_scale = 0.0;
  const Plant quiet = builtin("attitude3", 2, no_residual);
  SealedPlant sealed(quiet);
  CHECK(step_true(sealed, VectorXd::Zero(3), VectorXd::Zero(3)).norm() == 0.0);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    PlantOptions o;
    o.residual_scale = 0.7;
    const Plant p = builtin("attitude3", seed, o);
    const VectorXd g = p.true_residual(VectorXd::Zero(3), VectorXd::Zero(3), verification_access());
    CHECK(g.cwiseAbs().maxCoeff() <= 0.7 * p.sampling_time());
  }
}

TEST_CASE("builtin is deterministic and rejects unknown names") {
  for (const char* name : {"oadi", "attitude3"}) {
    const Plant a = builtin(name, 42), b = builtin(name, 42), c = builtin(name, 43);
    CHECK(a.to_kv().to_string() == b.to_kv().to_string());
    CHECK(a.to_kv().to_string() != c.to_kv().to_string());
  }
  CHECK_THROWS_AS(builtin("quadrotor", 1), InputError);
}

TEST_CASE("plant dump and load is bit-exact") {
  for (const char* name : {"oadi", "attitude3"}) {
    const Plant a = builtin(name, 9);
    const Plant b = Plant::from_kv(KeyValue::parse(a.to_kv().to_string()));
    CHECK(b.to_kv().to_string() == a.to_kv().to_string());
    Rng rng(4);
    const VectorXd x = random_vector(rng, a.state_dim(), 1.0), w = random_vector(rng, a.input_dim(), 0.5);
    const auto key = verification_access();
    CHECK(a.true_residual(x, w, key) == b.true_residual(x, w, key));
  }
}

TEST_CASE("decomposition: true step minus nominal step is the residual") {
  for (const char* name : {"oadi", "attitude3"}) {
    const Plant p = builtin(name, 5);
    SealedPlant sealed(p);
    const auto key = verification_access();
    Rng rng(6);
    for (int i = 0; i < 50; ++i) {
      const VectorXd x = random_vector(rng, p.state_dim(), 2.0);
      const VectorXd w = random_vector(rng, p.input_dim(), name == std::string("oadi") ? 0.3 : 3.0);
      const VectorXd truth = p.true_residual(x, w, key);
      CHECK(((step_true(sealed, x, w) - step_nominal(p, x, w, nullptr)) - truth).cwiseAbs().maxCoeff() <= 1e-15);
      // The perfect model reproduces the true step bit for bit.
      const ResidualFn perfect = [&](const VectorXd& xx, const VectorXd& ww) { return p.true_residual(xx, ww, key); };
      CHECK(step_nominal(p, x, w, perfect) == step_true(sealed, x, w));
    }
  }
}

TEST_CASE("step_nominal composes h with the GP posterior mean") {
  const Plant p = builtin("attitude3", 1);
  gp::FeatureMap f{gp::FeatureMode::kInput, 3, 3};
  Rng rng(2);
  MatrixXd x(5, 3);
  for (int i = 0; i < 5; ++i) x.row(i) = random_vector(rng, 3, 1.0).transpose();
  const MatrixXd y = MatrixXd::Random(5, 3) * 0.01;
  const gp::ResidualModel model =
      gp::ResidualModel(f, std::vector<gp::Kernel>(3, gp::Kernel::isotropic(3, 1e-4, 1.0, 1e-8)))
          .condition(gp::split_channels(x, y, {}));
  const ResidualFn g_hat = simulate::mean_residual(model);
  for (int i = 0; i < 10; ++i) {
    const VectorXd s = random_vector(rng, 3, 1.0), w = random_vector(rng, 3, 1.0);
    const VectorXd expected = p.nominal(s, w) + model.posterior(w).mean;
    CHECK((step_nominal(p, s, w, g_hat) - expected).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("oadi closed-form prediction matches iterated stepping") {
  const Plant p = builtin("oadi", 8);
  SealedPlant sealed(p);
  const LinearParams& lp = p.linear_params(verification_access());
  Rng rng(3);
  VectorXd x = random_vector(rng, 2, 1.0);
  const VectorXd x0 = x;
  const int n = 200;
  std::vector<VectorXd> inputs;
  for (int k = 0; k < n; ++k) inputs.push_back(random_vector(rng, 2, 0.1));
  for (const auto& w : inputs) x = step_true(sealed, x, w);
  // x_N = A^N x0 + sum_k A^(N-1-k) (w_k + B_dist alloc(w_k) + D)
  VectorXd predicted = x0;
  MatrixXd power = MatrixXd::Identity(2, 2);
  for (int k = 0; k < n; ++k) power = lp.A * power;
  predicted = power * x0;
  for (int k = 0; k < n; ++k) {
    MatrixXd pk = MatrixXd::Identity(2, 2);
    for (int j = 0; j < n - 1 - k; ++j) pk = lp.A * pk;
    predicted += pk * (inputs[static_cast<std::size_t>(k)] + lp.B_dist * p.allocate(inputs[static_cast<std::size_t>(k)]) + lp.D_dist);
  }
  CHECK((predicted - x).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("compensation solve") {
  const Plant p = builtin("oadi", 1);
  const control::ControllerGains gains = control::default_gains(p);
  Rng rng(8);

  SUBCASE("no residual gives feedback linearization exactly") {
    const VectorXd x = random_vector(rng, 2, 1.0), ref = random_vector(rng, 2, 1.0);
    const VectorXd integral = VectorXd::Zero(2);
    const auto r = control::policy(gains, integral, ref, ref, x, p, nullptr);
    const VectorXd expected = control::desired_state(gains, integral, ref, ref, x) - p.drift(x);
    CHECK(r.input == expected);
    CHECK(r.converged);
  }

  SUBCASE("equilibrium with identity drift") {
    const Plant att = builtin("attitude3", 1);
    const control::ControllerGains g = control::default_gains(att);
    const VectorXd x = random_vector(rng, 3, 1.0);
    const auto r = control::policy(g, VectorXd::Zero(3), x, x, x, att, nullptr);
    CHECK(r.input.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("linear residual matches the linear-solve oracle") {
    for (int trial = 0; trial < 20; ++trial) {
      MatrixXd b = MatrixXd::Random(3, 3);
      b *= 0.5 / Eigen::JacobiSVD<MatrixXd>(b).singularValues()(0);
      const VectorXd target = random_vector(rng, 3, 2.0);
      const auto r = control::compensate(target, MatrixXd::Identity(3, 3),
                                         [&](const VectorXd& w) { return VectorXd(b * w); },
                                         control::SolveOptions{});
      const VectorXd oracle = (MatrixXd::Identity(3, 3) + b).inverse() * target;
      CHECK((r.input - oracle).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  SUBCASE("objective never increases") {
    for (int trial = 0; trial < 20; ++trial) {
      const VectorXd target = random_vector(rng, 2, 2.0);
      const VectorXd c = random_vector(rng, 2, 3.0);
      // A non-contractive residual forces backtracking.
      const auto r = control::compensate(
          target, MatrixXd::Identity(2, 2),
          [&](const VectorXd& w) { return VectorXd(1.5 * (w.array() * c.array()).sin()); },
          control::SolveOptions{});
      for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
        CHECK(r.objective_history[i] <= r.objective_history[i - 1]);
      }
      CHECK(r.residual == r.objective_history.back());
    }
  }

  SUBCASE("non-convergence is flagged") {
    control::SolveOptions o;
    o.max_iterations = 1;
    const auto r = control::compensate(VectorXd::Ones(2), MatrixXd::Identity(2, 2),
                                       [](const VectorXd& w) { return VectorXd(0.9 * w); }, o);
    CHECK_FALSE(r.converged);
    CHECK(r.residual > o.tolerance);
  }

  SUBCASE("policy is bitwise deterministic") {
    const VectorXd x = random_vector(rng, 2, 1.0), ref = random_vector(rng, 2, 1.0);
    const ResidualFn g = [](const VectorXd&, const VectorXd& w) { return VectorXd(0.3 * w.array().tanh()); };
    const auto a = control::policy(gains, VectorXd::Ones(2), ref, ref, x, p, g);
    const auto b = control::policy(gains, VectorXd::Ones(2), ref, ref, x, p, g);
    CHECK(a.input == b.input);
  }
}

TEST_CASE("integral clamp") {
  control::ControllerGains g = control::default_gains(builtin("attitude3", 1));
  g.integral_clamp = VectorXd::Constant(3, 0.5);
  const VectorXd s = control::update_integral(g, VectorXd::Constant(3, 0.4), VectorXd::Constant(3, 1.0),
                                              VectorXd::Zero(3));
  CHECK(s.maxCoeff() == 0.5);
}

TEST_CASE("gains validation and round trip") {
  control::ControllerGains g = control::default_gains(builtin("oadi", 1));
  const auto back = control::ControllerGains::from_kv(KeyValue::parse(g.to_kv().to_string()));
  CHECK(back.K == g.K);
  CHECK(back.K_I == g.K_I);
  g.K(0, 0) = -1.0;
  CHECK_THROWS_AS(g.validate(), InputError);
}

TEST_CASE("true-residual compensation tracks the reference") {
  const Plant oadi = builtin("oadi", 0);
  const auto gains = control::default_gains(oadi);
  trajgen::TaskOptions o;
  o.horizon = 500;
  const MatrixXd task = trajgen::task_reference(oadi, o);
  const auto perfect = simulate::verify_compensation(oadi, gains, task, simulate::Compensation::kTrueResidual);
  CHECK(perfect.max_error < 1e-6);
  const auto none = simulate::verify_compensation(oadi, gains, task, simulate::Compensation::kNone);
  CHECK(none.steady_state_error > 0.01);

  const Plant att = builtin("attitude3", 0);
  const auto att_perfect = simulate::verify_compensation(att, control::default_gains(att),
                                                        trajgen::task_reference(att),
                                                        simulate::Compensation::kTrueResidual);
  CHECK(att_perfect.max_error < 1e-4);
  CHECK(att_perfect.unconverged_solves == 0);
}
