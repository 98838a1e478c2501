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
#include <complex>
#include <set>

#include "doctest.h"
#include "infotraj/pipeline/experiment.hpp"
#include "infotraj/region/region.hpp"
#include "infotraj/trajgen/deviation.hpp"
#include "infotraj/trajgen/selection.hpp"
#include "infotraj/trajgen/tasks.hpp"

using namespace infotraj;
using namespace infotraj::trajgen;

namespace {

DeviationParams single_axis(std::vector<Tone> tones, double f_max = 2.0, int integrations = 0) {
  DeviationParams p;
  p.axes = {0};
  p.tones = {std::move(tones)};
  p.f_max = f_max;
  p.integrations = integrations;
  return p;
}

// |DFT|^2 of a real sequence at bins 0..n/2, one-sided.
std::vector<double> power_spectrum(const VectorXd& x) {
  const auto n = static_cast<int>(x.size());
  std::vector<double> out;
  for (int p = 0; p <= n / 2; ++p) {
    std::complex<double> acc = 0.0;
    for (int k = 0; k < n; ++k) acc += x(k) * std::polar(1.0, -2.0 * M_PI * p * k / n);
    out.push_back(std::norm(acc));
  }
  return out;
}

}  // namespace

TEST_CASE("deviation: quarter-period samples") {
  const MatrixXd d = deviation_sequence(single_axis({{1.0, 1.0}}), 4, 0.25, 1);
  const double expected[] = {0.0, 1.0, 0.0, -1.0, 0.0};
  for (int k = 0; k < 5; ++k) CHECK(d(k, 0) == doctest::Approx(expected[k]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("deviation: zero amplitudes reproduce the task bit for bit") {
  const systems::Plant plant = systems::builtin("attitude3", 2);
  const MatrixXd task = task_reference(plant);
  SelectionConfig sc;
  const DeviationParams zero = zero_deviation(plant, sc);
  CHECK(zero.is_zero());
  const MatrixXd ref = apply_deviation(task, zero, plant.sampling_time());
  CHECK(ref.rows() == task.rows());
  CHECK((ref.array() == task.array()).all());
  CHECK(deviation_sequence(zero, 10, 0.01, 3).isZero(0.0));
}

TEST_CASE("deviation: only the excited axes move") {
  DeviationParams p = single_axis({{0.5, 0.3}});
  p.axes = {1};
  const MatrixXd d = deviation_sequence(p, 50, 0.01, 3);
  CHECK(d.col(0).isZero(0.0));
  CHECK(d.col(2).isZero(0.0));
  CHECK(d.col(1).cwiseAbs().maxCoeff() > 0.1);
}

TEST_CASE("deviation: frequencies above f_max are rejected") {
  CHECK_THROWS_AS(deviation_sequence(single_axis({{2.5, 1.0}}, 2.0), 10, 0.01, 1), InputError);
  CHECK_THROWS_AS(deviation_sequence(single_axis({{0.0, 1.0}}, 2.0), 10, 0.01, 1), InputError);
  CHECK_NOTHROW(deviation_sequence(single_axis({{2.0, 1.0}}, 2.0), 10, 0.01, 1));
}

TEST_CASE("deviation: two tones occupy exactly their two DFT bins") {
  const int n = 400;
  const double T = 0.01;  // bins are 0.25 Hz apart
  const MatrixXd d = deviation_sequence(single_axis({{0.5, 0.7}, {1.75, -0.4}}), n - 1, T, 1);
  const std::vector<double> power = power_spectrum(d.col(0));
  double total = 0.0, on_bin = 0.0;
  for (std::size_t p = 0; p < power.size(); ++p) {
    total += power[p];
    if (p == 2 || p == 7) on_bin += power[p];
  }
  CHECK((total - on_bin) / total < 0.01);
}

TEST_CASE("deviation: the integrated form is the running integral of the signal") {
  const double T = 0.001;
  const DeviationParams p = single_axis({{0.8, 1.3}, {1.9, -0.6}}, 2.0, 1);
  const MatrixXd d = deviation_sequence(p, 2000, T, 1);
  // Trapezoid integral of the sine signal as an independent oracle.
  double integral = 0.0, worst = 0.0;
  auto signal = [](double t) { return 1.3 * std::sin(2 * M_PI * 0.8 * t) - 0.6 * std::sin(2 * M_PI * 1.9 * t); };
  for (int k = 1; k <= 2000; ++k) {
    integral += 0.5 * T * (signal((k - 1) * T) + signal(k * T));
    worst = std::max(worst, std::abs(integral - d(k, 0)));
  }
  CHECK(d(0, 0) == 0.0);
  CHECK(worst < 1e-5);
}

TEST_CASE("sample_candidates") {
  CandidateCaps caps;
  caps.axes = {0, 1, 2};
  caps.amplitude = VectorXd::Constant(3, 0.2);

  SUBCASE("count, distinctness and caps") {
    const auto c = sample_candidates(20, caps, 5);
    REQUIRE(c.size() == 20);
    std::set<std::vector<double>> seen;
    for (const auto& p : c) {
      CHECK(p.coefficient_count() == 12);
      for (double f : p.frequencies()) CHECK((f > 0.0 && f <= caps.f_max));
      for (double a : p.amplitudes()) CHECK(std::abs(a) <= 0.2);
      std::vector<double> key = p.frequencies();
      for (double a : p.amplitudes()) key.push_back(a);
      seen.insert(key);
    }
    CHECK(seen.size() == 20);
  }

  SUBCASE("deterministic under seed") {
    const auto a = sample_candidates(5, caps, 9), b = sample_candidates(5, caps, 9);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].frequencies() == b[i].frequencies());
      CHECK(a[i].amplitudes() == b[i].amplitudes());
    }
  }

  SUBCASE("zero caps give the task back") {
    caps.amplitude.setZero();
    const systems::Plant plant = systems::builtin("attitude3", 0);
    const MatrixXd task = task_reference(plant);
    for (const auto& p : sample_candidates(4, caps, 1)) {
      CHECK((apply_deviation(task, p, plant.sampling_time()).array() == task.array()).all());
    }
  }
}

TEST_CASE("candidate caps follow where the deviation acts") {
  const systems::Plant att = systems::builtin("attitude3", 0);
  const systems::Plant oadi = systems::builtin("oadi", 0);
  SelectionConfig sc;
  const CandidateCaps ca = candidate_caps(att, task_reference(att), sc);
  const CandidateCaps co = candidate_caps(oadi, task_reference(oadi), sc);
  CHECK(ca.integrations == 1);
  CHECK(co.integrations == 0);
  // oadi: 25 percent of the state peak (position 1, velocity 2 pi / 5).
  CHECK(co.amplitude(0) == doctest::Approx(0.25));
  // attitude3 y axis: 25 percent of the peak angular acceleration 2 a w^2.
  const double w = 2 * M_PI / 4.0;
  CHECK(ca.amplitude(1) == doctest::Approx(0.25 * 0.45 * 2 * w * w).epsilon(1e-3));
}

TEST_CASE("rank_candidates") {
  std::vector<CandidateReport> c(4);
  const double costs[] = {3.0, 1.0, 1.0, 0.5};
  for (int i = 0; i < 4; ++i) {
    c[static_cast<std::size_t>(i)].id = i;
    c[static_cast<std::size_t>(i)].cost = costs[i];
    c[static_cast<std::size_t>(i)].feasible = true;
  }
  c[3].feasible = false;
  int winner = -1;
  rank_candidates(c, winner);
  CHECK(winner == 1);  // tie with id 2 broken by id
  CHECK(c[1].rank == 0);
  CHECK(c[2].rank == 1);
  CHECK(c[0].rank == 2);
  CHECK(c[3].rank == -1);

  for (auto& r : c) r.feasible = false;
  CHECK_THROWS_AS(rank_candidates(c, winner), SelectionError);
}

TEST_CASE("cost dominance: data on the evaluation points beats data far away") {
  Rng rng(4);
  MatrixXd eval(30, 2);
  for (Eigen::Index i = 0; i < eval.rows(); ++i) eval.row(i) << rng.uniform(-1, 1), rng.uniform(-1, 1);
  const gp::ResidualModel prior({gp::FeatureMode::kInput, 0, 2}, {gp::Kernel::isotropic(2, 1.0, 0.5, 1e-3)});
  std::vector<CandidateReport> c(2);
  c[0].id = 0;
  c[0].feasible = true;
  c[0].cost = region::informative_cost(prior, {gp::Dataset(eval, VectorXd::Zero(30))}, eval).value;
  c[1].id = 1;
  c[1].feasible = true;
  c[1].cost = region::informative_cost(prior, {gp::Dataset(eval.array() + 10.0, VectorXd::Zero(30))}, eval).value;
  int winner = -1;
  rank_candidates(c, winner);
  CHECK(winner == 0);
  CHECK(c[1].cost == doctest::Approx(30 * 1.001).epsilon(1e-6));
}

TEST_CASE("select_informative on oadi") {
  pipeline::ExperimentConfig config;
  config.plant = "oadi";
  const pipeline::SeedSetup setup = pipeline::setup_seed(config, 0);
  systems::SealedPlant plant(setup.plant);
  const pipeline::PriorResult prior = pipeline::build_prior(plant, setup, config);
  const long long steps_before = plant.total_steps();

  SelectionConfig sc = config.selection;
  sc.candidates = 8;
  sc.include_task = true;
  sc.seed = 21;
  const SelectionResult a = select_informative(setup.plant, setup.gains, prior.model, setup.task, sc);
  const SelectionResult b = select_informative(setup.plant, setup.gains, prior.model, setup.task, sc);

  REQUIRE(a.candidates.size() == 9);
  CHECK(a.winner == b.winner);
  CHECK(a.report_csv() == b.report_csv());
  // Selection runs on the model only.
  CHECK(plant.total_steps() == steps_before);

  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : a.candidates) {
    if (c.feasible) best = std::min(best, c.cost);
  }
  CHECK(a.best().cost == best);
  CHECK(a.best().rank == 0);
  // The zero-deviation control candidate is last; the winner is no worse.
  CHECK(a.candidates.back().params.is_zero());
  CHECK(a.best().cost <= a.candidates.back().cost);

  SUBCASE("a superset of candidates never has a worse winner") {
    std::vector<DeviationParams> subset, superset;
    for (std::size_t i = 0; i < a.candidates.size(); ++i) {
      superset.push_back(a.candidates[i].params);
      if (i % 2 == 0) subset.push_back(a.candidates[i].params);
    }
    const SelectionResult small = evaluate_candidates(setup.plant, setup.gains, prior.model, setup.task, subset, sc);
    const SelectionResult large = evaluate_candidates(setup.plant, setup.gains, prior.model, setup.task, superset, sc);
    CHECK(large.best().cost <= small.best().cost);
  }

  SUBCASE("a single feasible candidate wins") {
    const SelectionResult one = evaluate_candidates(setup.plant, setup.gains, prior.model, setup.task,
                                                    {a.candidates.front().params}, sc);
    CHECK(one.winner == 0);
  }

  SUBCASE("the report has one row per candidate") {
    sc.candidates = 20;
    sc.include_task = false;
    const SelectionResult twenty = select_informative(setup.plant, setup.gains, prior.model, setup.task, sc);
    const std::string csv = twenty.report_csv();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 21);
  }
}
