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
#include <limits>
#include <map>

#include "doctest.h"
#include "infotraj/pipeline/experiment.hpp"
#include "infotraj/region/region.hpp"

using namespace infotraj;
using namespace infotraj::region;

namespace {

gp::ResidualModel one_channel(const gp::Kernel& k, const MatrixXd& x, const VectorXd& y) {
  const gp::ResidualModel empty({gp::FeatureMode::kInput, 0, static_cast<int>(k.dim())}, {k});
  return x.rows() == 0 ? empty : empty.condition({gp::Dataset(x, y)});
}

MatrixXd uniform(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

Box unit_box(int d) { return make_box(VectorXd::Constant(d, -1.0), VectorXd::Constant(d, 1.0)); }

}  // namespace

TEST_CASE("region_from_sources: epsilon covering the bounds keeps every sample") {
  Rng rng(1);
  const std::vector<MatrixXd> sources = {uniform(rng, 10, 3, -0.2, 0.2)};
  const RegionEstimate r = region_from_sources(sources, unit_box(3), VectorXd::Ones(3), 100.0, 500, 4);
  CHECK(r.size() == 500);
  CHECK(r.samples_drawn == 500);
  CHECK(r.sampling_box.lower.isApprox(VectorXd::Constant(3, -1.0)));
  CHECK(r.volume() == doctest::Approx(8.0));
}

TEST_CASE("region_from_sources: epsilon zero is an empty region") {
  const std::vector<MatrixXd> sources = {MatrixXd::Zero(1, 2)};
  CHECK_THROWS_AS(region_from_sources(sources, unit_box(2), VectorXd::Ones(2), 0.0, 1000, 1), EmptyRegionError);
  CHECK_THROWS_AS(region_from_sources({MatrixXd(0, 2)}, unit_box(2), VectorXd::Ones(2), 1.0, 10, 1),
                  EmptyRegionError);
}

TEST_CASE("region_from_candidates: hand geometry") {
  // One-step rollout at z0 = (0, 0); weighted distances 0.5, 1.0, 1.5, 2.0, 3.0.
  const std::vector<MatrixXd> sources = {MatrixXd::Zero(1, 2)};
  MatrixXd grid(5, 2);
  grid << 1.0, 0.0,   //
      0.0, 4.0,       // weight 0.5 on the second axis: distance 2
      0.0, -1.0,      // 0.5
      3.0, 0.0,       //
      1.2, 1.8;       // sqrt(1.44 + 0.81) = 1.5
  const VectorXd w = (VectorXd(2) << 1.0, 0.5).finished();
  const RegionEstimate r = region_from_candidates(sources, grid, w, 1.2);
  REQUIRE(r.size() == 2);
  CHECK(r.points.row(0) == grid.row(0));
  CHECK(r.points.row(1) == grid.row(2));
  CHECK(weighted_distance(grid.row(4).transpose(), VectorXd::Zero(2), w) == doctest::Approx(1.5));
}

TEST_CASE("region membership and default weights") {
  Rng rng(7);
  const std::vector<MatrixXd> sources = {uniform(rng, 30, 3, -0.5, 0.5), uniform(rng, 20, 3, 0.0, 0.8)};
  const VectorXd w = default_weights(sources);
  CHECK((w.array() > 0.0).all());
  const RegionEstimate r = region_from_sources(sources, unit_box(3), w, 0.3, 2000, 11);
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    CHECK(r.contains(r.points.row(i).transpose()));
    CHECK(r.sampling_box.contains(r.points.row(i).transpose()));
  }

  // A constant coordinate gets the floored range, not an infinite weight.
  MatrixXd flat(3, 2);
  flat << 0.0, 5.0, 1.0, 5.0, 2.0, 5.0;
  const VectorXd wf = default_weights({flat});
  CHECK(wf(0) == doctest::Approx(0.5));
  CHECK(wf(1) == doctest::Approx(5.0));
}

TEST_CASE("region_from_sources is deterministic under seed") {
  Rng rng(3);
  const std::vector<MatrixXd> sources = {uniform(rng, 10, 2, -0.3, 0.3)};
  const RegionEstimate a = region_from_sources(sources, unit_box(2), VectorXd::Ones(2), 0.2, 1000, 5);
  const RegionEstimate b = region_from_sources(sources, unit_box(2), VectorXd::Ones(2), 0.2, 1000, 5);
  const RegionEstimate c = region_from_sources(sources, unit_box(2), VectorXd::Ones(2), 0.2, 1000, 6);
  CHECK(a.points == b.points);
  CHECK(a.to_csv() == b.to_csv());
  CHECK(!(a.points.rows() == c.points.rows() && a.points == c.points));
}

TEST_CASE("sample_evaluation_set") {
  RegionEstimate r;
  r.points = (MatrixXd(10, 1) << 0, 1, 2, 3, 4, 5, 6, 7, 8, 9).finished();

  SUBCASE("draws with replacement, deterministic") {
    const MatrixXd s = sample_evaluation_set(r, 10, 3);
    CHECK(s.rows() == 10);
    CHECK(s == sample_evaluation_set(r, 10, 3));
    for (Eigen::Index i = 0; i < s.rows(); ++i) CHECK((s(i, 0) >= 0 && s(i, 0) <= 9));
  }

  SUBCASE("uniform over the points") {
    const int draws = 100000;
    const MatrixXd s = sample_evaluation_set(r, draws, 42);
    std::map<int, int> counts;
    for (Eigen::Index i = 0; i < s.rows(); ++i) ++counts[static_cast<int>(s(i, 0))];
    const double p = 0.1, expected = draws * p, stderr_count = std::sqrt(draws * p * (1 - p));
    double chi2 = 0.0;
    for (int v = 0; v < 10; ++v) {
      CHECK(std::abs(counts[v] - expected) < 4.0 * stderr_count);
      chi2 += (counts[v] - expected) * (counts[v] - expected) / expected;
    }
    // 9 degrees of freedom; the 0.999 quantile is 27.88.
    CHECK(chi2 < 27.88);
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(sample_evaluation_set(RegionEstimate{}, 5, 1), EmptyRegionError);
    CHECK_THROWS_AS(sample_evaluation_set(r, 0, 1), InputError);
  }
}

TEST_CASE("informative_cost") {
  Rng rng(9);
  const gp::Kernel k = gp::Kernel::isotropic(2, 1.5, 0.6, 0.02);
  const MatrixXd eval = uniform(rng, 25, 2, -1, 1);

  SUBCASE("no data: the prior variance everywhere") {
    const InformativeCost c = informative_cost(one_channel(k, MatrixXd(0, 2), VectorXd(0)), {}, eval);
    CHECK(c.value == doctest::Approx(25 * 1.52));
    CHECK(c.value == doctest::Approx(c.per_point.sum()).epsilon(1e-12));
    const InformativeCost empty_rollout = informative_cost(
        one_channel(k, MatrixXd(0, 2), VectorXd(0)), {gp::Dataset(MatrixXd(0, 2), VectorXd(0))}, eval);
    CHECK(empty_rollout.value == c.value);
  }

  SUBCASE("data at every evaluation point without noise") {
    const gp::Kernel exact = gp::Kernel::isotropic(2, 1.5, 0.6, 0.0);
    const gp::ResidualModel model = one_channel(exact, MatrixXd(0, 2), VectorXd(0));
    const InformativeCost c = informative_cost(model, {gp::Dataset(eval, VectorXd::Zero(25))}, eval);
    CHECK(c.value <= 1e-8 * 25 * 1.5);
    CHECK(c.value >= 0.0);
    CHECK(model.total_points() == 0);
  }

  SUBCASE("1-d toy against the closed form") {
    const gp::Kernel k1 = gp::Kernel::isotropic(1, 0.8, 0.5, 0.1);
    const MatrixXd pts = (MatrixXd(3, 1) << -0.4, 0.1, 0.7).finished();
    const double x0 = 0.2;
    const InformativeCost c = informative_cost(one_channel(k1, MatrixXd(0, 1), VectorXd(0)),
                                               {gp::Dataset(MatrixXd::Constant(1, 1, x0), VectorXd::Ones(1))},
                                               pts);
    double oracle = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double kx = 0.8 * std::exp(-0.5 * std::pow((pts(i, 0) - x0) / 0.5, 2));
      oracle += 0.8 + 0.1 - kx * kx / (0.8 + 0.1);
    }
    CHECK(std::abs(c.value - oracle) < 1e-10);
  }

  SUBCASE("adding an observation never increases the cost") {
    for (int trial = 0; trial < 50; ++trial) {
      const MatrixXd x = uniform(rng, static_cast<Eigen::Index>(rng.index(10)), 2, -1, 1);
      const gp::ResidualModel model = one_channel(k, x, VectorXd::Zero(x.rows()));
      const MatrixXd extra = uniform(rng, 1 + static_cast<Eigen::Index>(rng.index(3)), 2, -1.5, 1.5);
      const double before = informative_cost(model, {}, eval).value;
      const double after = informative_cost(model, {gp::Dataset(extra, VectorXd::Zero(extra.rows()))}, eval).value;
      CHECK(after <= before + 1e-10);
    }
  }
}

TEST_CASE("mc_integral of a constant field is V times the constant") {
  CHECK(mc_integral(VectorXd::Constant(100, 2.0), 3.0) == doctest::Approx(6.0));
  CHECK_THROWS_AS(mc_integral(VectorXd(0), 1.0), InputError);
}

TEST_CASE("estimate_region on a plant: soundness and determinism") {
  pipeline::ExperimentConfig config;
  config.plant = "attitude3";
  config.fit_enabled = false;
  const pipeline::SeedSetup setup = pipeline::setup_seed(config, 3);
  systems::SealedPlant plant(setup.plant);
  const pipeline::PriorResult prior = pipeline::build_prior(plant, setup, config);
  RegionOptions options;
  options.grid_size = 1024;
  options.seed = 17;
  const RegionEstimate a = estimate_region(setup.plant, setup.gains, prior.model, setup.task, options);
  const RegionEstimate b = estimate_region(setup.plant, setup.gains, prior.model, setup.task, options);
  CHECK(a.size() > 0);
  CHECK(a.points == b.points);
  CHECK(a.epsilon == b.epsilon);
  CHECK(a.source_rollouts.size() == 3);
  for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(a.contains(a.points.row(i).transpose()));

  options.epsilon = 0.0;
  CHECK_THROWS_AS(estimate_region(setup.plant, setup.gains, prior.model, setup.task, options), EmptyRegionError);
  // Region construction never touches the true dynamics.
  CHECK(plant.steps(systems::Access::kExperiment) == setup.task.rows());
}
