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
#include <numeric>
#include <set>

#include "doctest.h"
#include "infotraj/gp/function_sample.hpp"
#include "infotraj/gp/hyperparameters.hpp"
#include "infotraj/gp/io.hpp"
#include "infotraj/gp/kmedoids.hpp"
#include "infotraj/gp/residual_model.hpp"

using namespace infotraj;
using namespace infotraj::gp;

namespace {

// Dense-formula oracle: explicit inverse, no Cholesky.
struct DenseOracle {
  double mean;
  double variance;
};

DenseOracle dense_posterior(const Kernel& k, const MatrixXd& x, const VectorXd& y, const VectorXd& q) {
  const Eigen::Index n = x.rows();
  MatrixXd kxx(n, n);
  VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ks(i) = k(q, x.row(i).transpose());
    for (Eigen::Index j = 0; j < n; ++j) kxx(i, j) = k(x.row(i).transpose(), x.row(j).transpose());
  }
  kxx.diagonal().array() += k.noise_variance;
  const MatrixXd inv = kxx.fullPivLu().inverse();
  return {ks.dot(inv * y), k.signal_variance + k.noise_variance - ks.dot(inv * ks)};
}

MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

FeatureMap input_features(int dim) { return {FeatureMode::kInput, 0, dim}; }

ResidualModel one_channel(const Kernel& k, const MatrixXd& x, const VectorXd& y) {
  return ResidualModel(input_features(static_cast<int>(k.dim())), {k}).condition({Dataset(x, y)});
}

}  // namespace

TEST_CASE("kernel_eval closed form") {
  const Kernel unit = Kernel::isotropic(1, 1.0, 1.0, 0.0);
  VectorXd a(1), b(1);
  a << 0.3;
  CHECK(kernel_eval(unit, a, a) == doctest::Approx(1.0));
  a << 0.0;
  b << 100.0;
  CHECK(kernel_eval(unit, a, b) < 1e-300);

  Kernel k(2.0, (VectorXd(2) << 1.0, 2.0).finished(), 0.0);
  VectorXd p = VectorXd::Zero(2), r(2);
  r << 1.0, 2.0;
  CHECK(kernel_eval(k, p, r) == doctest::Approx(0.7357588823428847).epsilon(1e-14));
  CHECK(kernel_eval(k, p, r) == kernel_eval(k, r, p));

  CHECK_THROWS_AS(kernel_eval(k, VectorXd::Zero(3), r), InputError);
  CHECK_THROWS_AS(Kernel(1.0, VectorXd::Constant(2, -1.0), 0.0), InputError);
  CHECK_THROWS_AS(Kernel(0.0, VectorXd::Constant(2, 1.0), 0.0), InputError);
}

TEST_CASE("posterior of an empty model is the prior") {
  const ResidualModel model(input_features(2), {Kernel::isotropic(2, 1.0, 0.7, 0.01)});
  const Posterior p = posterior(model, VectorXd::Constant(2, 0.4));
  CHECK(p.mean(0) == 0.0);
  CHECK(p.variance(0) == doctest::Approx(1.01));
}

TEST_CASE("noise-free posterior interpolates") {
  Rng rng(11);
  const Kernel k = Kernel::isotropic(2, 1.3, 0.8, 0.0);
  const MatrixXd x = random_matrix(rng, 6, 2, -2, 2);
  const VectorXd y = random_matrix(rng, 6, 1, -1, 1);
  const ResidualModel model = one_channel(k, x, y);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Posterior p = model.posterior(x.row(i).transpose());
    CHECK(p.mean(0) == doctest::Approx(y(i)).epsilon(1e-8));
    CHECK(p.variance(0) < 1e-8);
  }
}

TEST_CASE("posterior matches the dense oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(4));
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.index(10));
    Kernel k(rng.uniform(0.5, 2.0), random_matrix(rng, d, 1, 0.5, 2.0), rng.uniform(1e-3, 1e-1));
    const MatrixXd x = random_matrix(rng, n, d, -2, 2);
    const VectorXd y = random_matrix(rng, n, 1, -1, 1);
    const VectorXd q = random_matrix(rng, d, 1, -2.5, 2.5);
    const auto oracle = dense_posterior(k, x, y, q);
    const Posterior p = one_channel(k, x, y).posterior(q);
    CHECK(std::abs(p.mean(0) - oracle.mean) < 1e-10);
    CHECK(std::abs(p.variance(0) - oracle.variance) < 1e-10);
  }
}

TEST_CASE("posterior rejects a query of the wrong dimension") {
  const ResidualModel model(input_features(2), {Kernel::isotropic(2, 1.0, 1.0, 0.1)});
  CHECK_THROWS_AS(model.posterior(VectorXd::Zero(3)), InputError);
}

TEST_CASE("condition") {
  Rng rng(5);
  const Kernel k = Kernel::isotropic(2, 1.0, 0.6, 1e-3);
  const MatrixXd x = random_matrix(rng, 8, 2, -1, 1);
  const VectorXd y = random_matrix(rng, 8, 1, -1, 1);
  const ResidualModel base = one_channel(k, x, y);

  SUBCASE("with zero points is a no-op") {
    const ResidualModel same = base.condition({Dataset(MatrixXd(0, 2), VectorXd(0))});
    for (int i = 0; i < 10; ++i) {
      const VectorXd q = random_matrix(rng, 2, 1, -2, 2);
      CHECK(same.posterior(q).mean(0) == base.posterior(q).mean(0));
      CHECK(same.posterior(q).variance(0) == base.posterior(q).variance(0));
    }
  }

  SUBCASE("never increases variance and leaves the original untouched") {
    const MatrixXd xn = random_matrix(rng, 3, 2, -1, 1);
    const VectorXd yn = random_matrix(rng, 3, 1, -1, 1);
    const ResidualModel updated = base.condition({Dataset(xn, yn)});
    CHECK(base.total_points() == 8);
    CHECK(updated.total_points() == 11);
    for (int i = 0; i < 50; ++i) {
      const VectorXd q = random_matrix(rng, 2, 1, -2, 2);
      CHECK(updated.posterior(q).variance(0) <= base.posterior(q).variance(0) + 1e-12);
    }
  }

  SUBCASE("two batches equal one batch") {
    const MatrixXd xa = random_matrix(rng, 3, 2, -1, 1), xb = random_matrix(rng, 4, 2, -1, 1);
    const VectorXd ya = random_matrix(rng, 3, 1, -1, 1), yb = random_matrix(rng, 4, 1, -1, 1);
    const ResidualModel twice = base.condition({Dataset(xa, ya)}).condition({Dataset(xb, yb)});
    MatrixXd xab(7, 2);
    xab << xa, xb;
    VectorXd yab(7);
    yab << ya, yb;
    const ResidualModel once = base.condition({Dataset(xab, yab)});
    for (int i = 0; i < 10; ++i) {
      const VectorXd q = random_matrix(rng, 2, 1, -2, 2);
      CHECK(std::abs(twice.posterior(q).mean(0) - once.posterior(q).mean(0)) < 1e-8);
      CHECK(std::abs(twice.posterior(q).variance(0) - once.posterior(q).variance(0)) < 1e-8);
    }
  }

  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(base.condition({Dataset(MatrixXd::Zero(1, 3), VectorXd::Zero(1))}), InputError);
  }
}

TEST_CASE("variance monotonicity property") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(3));
    Kernel k(rng.uniform(0.2, 3.0), random_matrix(rng, d, 1, 0.2, 2.0), rng.uniform(0.0, 0.2));
    const MatrixXd x = random_matrix(rng, static_cast<Eigen::Index>(rng.index(8)), d, -2, 2);
    const ResidualModel model = one_channel(k, x, VectorXd::Zero(x.rows()));
    const ResidualModel more = model.condition({Dataset(random_matrix(rng, 1, d, -2, 2), VectorXd::Zero(1))});
    const VectorXd q = random_matrix(rng, d, 1, -3, 3);
    CHECK(more.posterior(q).variance(0) <= model.posterior(q).variance(0) + 1e-12);
  }
}

TEST_CASE("sample_function reproduces noise-free training targets") {
  VectorXd x0(1);
  x0 << 0.25;
  const ResidualModel model =
      one_channel(Kernel::isotropic(1, 1.0, 0.5, 0.0), x0.transpose(), VectorXd::Constant(1, 0.8));
  MatrixXd anchors(3, 1);
  anchors << 0.25, -1.0, 1.5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto g = sample_function(model, anchors, seed);
    CHECK(g(x0)(0) == doctest::Approx(0.8).epsilon(1e-6));
  }
}

TEST_CASE("sample_function is deterministic under seed") {
  const ResidualModel model(input_features(2), {Kernel::isotropic(2, 1.0, 0.5, 0.0)});
  Rng rng(1);
  const MatrixXd anchors = random_matrix(rng, 5, 2, -1, 1);
  auto a = sample_function(model, anchors, 42);
  auto b = sample_function(model, anchors, 42);
  const VectorXd q = random_matrix(rng, 2, 1, -1, 1);
  CHECK(a(q)(0) == b(q)(0));
  CHECK_THROWS_AS(sample_function(model, MatrixXd(0, 2), 1), InputError);
}

TEST_CASE("sample_function moments match the posterior") {
  Rng rng(7);
  const Kernel k = Kernel::isotropic(1, 1.0, 0.7, 1e-6);
  const MatrixXd x = random_matrix(rng, 4, 1, -2, 2);
  const VectorXd y = random_matrix(rng, 4, 1, -1, 1);
  const ResidualModel model = one_channel(k, x, y);
  MatrixXd anchors(4, 1);
  anchors << -2.5, -0.1, 0.9, 2.8;
  VectorXd z(1);
  z << 0.9;  // anchor, away from the data
  const Posterior p = model.posterior(z);
  const double latent_var = p.variance(0) - k.noise_variance;

  const int draws = 2000;
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < draws; ++s) {
    auto g = sample_function(model, anchors, static_cast<std::uint64_t>(s) + 1000);
    const double v = g(z)(0);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / draws;
  const double var = sum_sq / draws - mean * mean;
  CHECK(std::abs(mean - p.mean(0)) < 4.0 * std::sqrt(latent_var / draws));
  CHECK(std::abs(var - latent_var) < 0.2 * latent_var);

  // The pointwise fallback draws from the same marginal.
  sum = 0.0;
  sum_sq = 0.0;
  auto pw = sample_function(model, anchors, 5, SampleMode::kPointwise);
  for (int s = 0; s < draws; ++s) {
    const double v = pw(z)(0);
    sum += v;
    sum_sq += v * v;
  }
  const double pw_mean = sum / draws;
  CHECK(std::abs(pw_mean - p.mean(0)) < 4.0 * std::sqrt(latent_var / draws));
  CHECK(std::abs(sum_sq / draws - pw_mean * pw_mean - latent_var) < 0.2 * latent_var);
}

TEST_CASE("fit_hyperparameters recovers a known lengthscale") {
  // Draw a function from a known prior and fit it back.
  Rng rng(2024);
  const Eigen::Index n = 60;
  MatrixXd x(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = rng.uniform(0.0, 6.0);
  const Kernel truth = Kernel::isotropic(1, 1.0, 0.5, 1e-4);
  const MatrixXd cov = truth.gram(x);
  const MatrixXd l = cov.llt().matrixL();
  const VectorXd y = l * rng.normal_vector(n);
  const Dataset data(x, y);

  const Kernel init = Kernel::isotropic(1, 0.3, 2.0, 1e-2);
  KernelBounds bounds;
  bounds.noise_variance_min = 1e-6;
  const Kernel fit = fit_hyperparameters(data, init, bounds, {5, 300, 1});
  CHECK(fit.lengthscales(0) > 0.25);
  CHECK(fit.lengthscales(0) < 1.0);
  CHECK(log_marginal_likelihood(data, fit) >= log_marginal_likelihood(data, init) - 1e-9);

  const Kernel again = fit_hyperparameters(data, init, bounds, {5, 300, 1});
  CHECK(again.lengthscales(0) == fit.lengthscales(0));
}

TEST_CASE("fit_hyperparameters handles duplicated inputs") {
  MatrixXd x(6, 1);
  x << 0.0, 0.0, 0.0, 1.0, 1.0, 1.0;
  VectorXd y(6);
  y << 0.1, 0.1, 0.1, -0.2, -0.2, -0.2;
  KernelBounds bounds;
  bounds.noise_variance_min = 1e-6;
  const Dataset data(x, y);
  const Kernel init = Kernel::isotropic(1, 1.0, 1.0, 1e-6);
  Kernel fit;
  CHECK_NOTHROW(fit = fit_hyperparameters(data, init, bounds));
  CHECK(log_marginal_likelihood(data, fit) >= log_marginal_likelihood(data, init) - 1e-9);
  CHECK_THROWS_AS(fit_hyperparameters(Dataset(x.topRows(1), y.head(1)), init, bounds), InputError);
}

TEST_CASE("nelder_mead minimizes a shifted quadratic inside a box") {
  const auto f = [](const VectorXd& v) { return (v.array() - 0.3).square().sum(); };
  const auto r = nelder_mead(f, VectorXd::Constant(3, 1.5), VectorXd::Constant(3, -2.0),
                             VectorXd::Constant(3, 2.0), 0.5, 2000, 1e-14);
  CHECK((r.argmin.array() - 0.3).abs().maxCoeff() < 1e-4);
  const auto boxed = nelder_mead(f, VectorXd::Constant(3, 1.5), VectorXd::Constant(3, 1.0),
                                 VectorXd::Constant(3, 2.0), 0.5, 2000, 1e-14);
  CHECK((boxed.argmin.array() - 1.0).abs().maxCoeff() < 1e-4);
}

namespace {

double exhaustive_optimum(const MatrixXd& points, int k) {
  const int n = static_cast<int>(points.rows());
  std::vector<int> pick(static_cast<std::size_t>(n), 0);
  std::fill(pick.end() - k, pick.end(), 1);
  double best = std::numeric_limits<double>::infinity();
  do {
    std::vector<Eigen::Index> medoids;
    for (int i = 0; i < n; ++i)
      if (pick[static_cast<std::size_t>(i)]) medoids.push_back(i);
    best = std::min(best, medoid_cost(points, medoids));
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

}  // namespace

TEST_CASE("kmedoids") {
  Rng rng(17);

  SUBCASE("k equal to size returns the dataset") {
    const MatrixXd x = random_matrix(rng, 7, 2, -1, 1);
    const Dataset d(x, VectorXd::LinSpaced(7, 0, 6));
    const Dataset sub = kmedoids_subsample(d, 7, 1);
    std::set<double> targets(sub.targets.data(), sub.targets.data() + sub.size());
    CHECK(targets.size() == 7);
  }

  SUBCASE("two separated clusters get one medoid each") {
    MatrixXd x(20, 2);
    x.topRows(10) = random_matrix(rng, 10, 2, -0.5, 0.5);
    x.bottomRows(10) = random_matrix(rng, 10, 2, 9.5, 10.5);
    const auto r = kmedoids(x, 2, 3);
    REQUIRE(r.medoids.size() == 2);
    CHECK(r.medoids[0] < 10);
    CHECK(r.medoids[1] >= 10);
    CHECK(r.cost == doctest::Approx(exhaustive_optimum(x, 2)).epsilon(1e-12));
  }

  SUBCASE("k=3 on 12 points is near the exhaustive optimum") {
    for (int trial = 0; trial < 10; ++trial) {
      const MatrixXd x = random_matrix(rng, 12, 2, -3, 3);
      const auto r = kmedoids(x, 3, static_cast<std::uint64_t>(trial));
      CHECK(r.cost <= 1.1 * exhaustive_optimum(x, 3));
    }
  }

  SUBCASE("output is a subset and swaps never increase cost") {
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::Index n = 10 + static_cast<Eigen::Index>(rng.index(60));
      const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
      const MatrixXd x = random_matrix(rng, n, 3, -1, 1);
      const auto r = kmedoids(x, k, static_cast<std::uint64_t>(trial));
      CHECK(static_cast<Eigen::Index>(std::set<Eigen::Index>(r.medoids.begin(), r.medoids.end()).size()) == k);
      for (auto m : r.medoids) CHECK((m >= 0 && m < n));
      for (std::size_t i = 1; i < r.cost_history.size(); ++i) {
        CHECK(r.cost_history[i] <= r.cost_history[i - 1]);
      }
      CHECK(r.cost == doctest::Approx(medoid_cost(x, r.medoids)));
    }
  }

  SUBCASE("invalid k") {
    const Dataset d(random_matrix(rng, 4, 2, 0, 1), VectorXd::Zero(4));
    CHECK_THROWS_AS(kmedoids_subsample(d, 0, 1), InputError);
    CHECK_THROWS_AS(kmedoids_subsample(d, 5, 1), InputError);
  }
}

TEST_CASE("kernel and dataset persistence round-trip") {
  Rng rng(8);
  const Kernel k(0.123456789, random_matrix(rng, 3, 1, 0.1, 2.0), 1.0 / 3.0);
  const Kernel back = kernel_from_kv(KeyValue::parse(kernel_to_kv(k).to_string()));
  CHECK(back.signal_variance == k.signal_variance);
  CHECK(back.lengthscales == k.lengthscales);
  CHECK(back.noise_variance == k.noise_variance);

  const std::vector<Dataset> data = {Dataset(random_matrix(rng, 4, 3, -1, 1), random_matrix(rng, 4, 1, -1, 1), {1, 1, 2, 2}),
                                     Dataset(random_matrix(rng, 2, 3, -1, 1), random_matrix(rng, 2, 1, -1, 1), {3, 3})};
  const std::string csv = datasets_to_csv(data);
  CHECK(csv.rfind("dim_0,dim_1,dim_2,target,channel,trajectory_id\n", 0) == 0);
  const auto loaded = datasets_from_csv(csv, 2);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].inputs == data[0].inputs);
  CHECK(loaded[1].targets == data[1].targets);
  CHECK(loaded[1].trajectory_ids == data[1].trajectory_ids);
}
