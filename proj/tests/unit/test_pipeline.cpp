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
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "infotraj/csv.hpp"
#include "infotraj/pipeline/experiment.hpp"
#include "infotraj/pipeline/statistics.hpp"

using namespace infotraj;
using namespace infotraj::pipeline;

namespace {

ExperimentConfig small_config(const std::string& plant = "attitude3") {
  ExperimentConfig c;
  c.plant = plant;
  c.budgets = {20, 40};
  c.selection.candidates = 4;
  c.selection.eval_points = 128;
  c.selection.region.grid_size = 1024;
  c.fit = {1, 60, 0};
  return c;
}

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("infotraj_test_pipeline_" + name);
  std::filesystem::remove_all(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("statistics") {
  CHECK(mean({1.0, 2.0, 6.0}) == doctest::Approx(3.0));
  CHECK(stddev({2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0}) == doctest::Approx(2.1380899352993947));
  CHECK(stddev({1.0}) == 0.0);
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(std::isnan(median({})));
  const std::vector<double> ranks = average_ranks({10.0, 20.0, 10.0, 30.0});
  CHECK(ranks == std::vector<double>{1.5, 3.0, 1.5, 4.0});
}

TEST_CASE("spearman") {
  SUBCASE("monotone and reversed") {
    // Constructed instance: cost falls as data coverage grows, and so does the error.
    const std::vector<double> coverage = {0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
    std::vector<double> cost, error;
    for (double c : coverage) {
      cost.push_back(1.0 / (0.1 + c));
      error.push_back(std::exp(-3.0 * c) + 0.01);
    }
    CHECK(spearman(cost, error).rho == doctest::Approx(1.0));
    CHECK(spearman(cost, coverage).rho == doctest::Approx(-1.0));
  }
  SUBCASE("ties against a hand computation") {
    // Ranks a = (1, 2.5, 2.5, 4), b = (2, 1, 4, 3): covariance 1.5 over sqrt(4.5 * 5), i.e. 1 / sqrt(10).
    const RankCorrelation r = spearman({1.0, 2.0, 2.0, 3.0}, {20.0, 10.0, 40.0, 30.0});
    CHECK(!r.degenerate);
    CHECK(r.rho == doctest::Approx(1.0 / std::sqrt(10.0)).epsilon(1e-12));
  }
  SUBCASE("degenerate") {
    CHECK(spearman({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}).degenerate);
    CHECK(spearman({1.0}, {2.0}).degenerate);
    CHECK(spearman({}, {}).degenerate);
  }
}

TEST_CASE("config parsing") {
  SUBCASE("round trip through the key-value form") {
    ExperimentConfig c = small_config();
    c.master_seed = 12345678901234ULL;
    const KeyValue kv = c.to_kv();
    const ExperimentConfig back = ExperimentConfig::from_kv(KeyValue::parse(kv.to_string()));
    CHECK(back.to_kv().to_string() == kv.to_string());
    CHECK(back.to_kv().hash() == kv.hash());
  }
  SUBCASE("unknown key names its line") {
    try {
      ExperimentConfig::from_kv(KeyValue::parse("plant.name = oadi\nselection.candidate = 3\n"));
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.key() == "selection.candidate");
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("missing plant name") {
    try {
      ExperimentConfig::from_kv(KeyValue::parse("run.seed = 1\n"));
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.key() == "plant.name");
    }
  }
  SUBCASE("invalid values") {
    CHECK_THROWS_AS(ExperimentConfig::from_kv(KeyValue::parse("plant.name = oadi\nexperiment.budgets = 40,20\n")),
                    ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_kv(KeyValue::parse("plant.name = oadi\nexperiment.arms = greedy\n")),
                    ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_kv(KeyValue::parse("plant.name = quad\n")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_kv(KeyValue::parse("plant.name = oadi\nrun.seed = -1\n")), ConfigError);
  }
}

TEST_CASE("run_iteration") {
  const ExperimentConfig config = small_config();
  const SeedSetup setup = setup_seed(config, 2);
  systems::SealedPlant plant(setup.plant);
  const PriorResult prior = build_prior(plant, setup, config);
  const long long n1 = setup.task.rows();
  CHECK(plant.steps(systems::Access::kExperiment) == n1);
  CHECK(prior.model.total_points() == 3 * config.prior_budget);

  SUBCASE("no_learning leaves the model and the error unchanged") {
    const long long experiment = plant.steps(systems::Access::kExperiment);
    const IterationRecord rec = run_iteration(plant, setup, config, prior.model, Arm::kNoLearning, 1);
    CHECK(plant.steps(systems::Access::kExperiment) == experiment);
    CHECK(rec.experiment_steps == 0);
    CHECK(!rec.executed);
    for (const auto& b : rec.budgets) {
      CHECK(b.model.total_points() == prior.model.total_points());
      CHECK(b.metrics.squared == prior.metrics.squared);
      CHECK(b.metrics.absolute == prior.metrics.absolute);
    }
  }

  SUBCASE("experiment steps are one task length per executing iteration") {
    for (Arm arm : {Arm::kInformative, Arm::kNonInformative}) {
      const long long before = plant.steps(systems::Access::kExperiment);
      const long long eval_before = plant.steps(systems::Access::kEvaluation);
      const IterationRecord rec = run_iteration(plant, setup, config, prior.model, arm, 1);
      CHECK(rec.experiment_steps == n1);
      CHECK(plant.steps(systems::Access::kExperiment) - before == n1);
      // One scoring run per budget, counted apart from the experiments.
      CHECK(plant.steps(systems::Access::kEvaluation) - eval_before ==
            static_cast<long long>(config.budgets.size()) * setup.eval_task.rows());
      CHECK(rec.largest().model.total_points() == prior.model.total_points() + 3 * 40);
    }
  }

  SUBCASE("non_informative executes the task itself") {
    const IterationRecord rec = run_iteration(plant, setup, config, prior.model, Arm::kNonInformative, 1);
    CHECK((rec.reference.array() == setup.task.array()).all());
    CHECK(std::isfinite(rec.cost));
  }

  SUBCASE("updating twice with the same budget gives the same model and error") {
    const IterationRecord rec = run_iteration(plant, setup, config, prior.model, Arm::kNonInformative, 1);
    const gp::ResidualModel a = update_model(prior.model, *rec.executed, 40, config, setup, 99);
    const gp::ResidualModel b = update_model(prior.model, *rec.executed, 40, config, setup, 99);
    CHECK(a.datasets()[0].inputs == b.datasets()[0].inputs);
    CHECK(a.kernels()[0].lengthscales == b.kernels()[0].lengthscales);
    CHECK(evaluate_task(plant, setup, a).to_csv() == evaluate_task(plant, setup, b).to_csv());
  }
}

TEST_CASE("run_seed: paired identity and determinism") {
  ExperimentConfig config = small_config();
  config.arms = {Arm::kInformative, Arm::kInformative};
  config.budgets = {20};
  const SeedResult a = run_seed(config, 4, "");
  REQUIRE(a.rows.size() == 2);
  CHECK(a.rows[0].err_sq == a.rows[1].err_sq);
  CHECK(a.experiment_steps[0] == a.experiment_steps[1]);
  std::vector<ComparisonRow> renamed = a.rows;
  renamed[1].arm = "twin";
  const auto imp = improvement(renamed, "informative", "twin");
  REQUIRE(imp.size() == 1);
  CHECK(imp[0].median_percent == 0.0);
  CHECK(imp[0].wins == 0);

  const SeedResult b = run_seed(config, 4, "");
  CHECK(comparison_csv(a.rows, 3) == comparison_csv(b.rows, 3));
}

TEST_CASE("two informative iterations on attitude3 improve on the prior") {
  ExperimentConfig config = small_config();
  config.arms = {Arm::kInformative};
  config.iterations = 2;
  config.budgets = {40};
  config.selection.candidates = 8;
  const SeedResult r = run_seed(config, 0, "");
  REQUIRE(r.arms[0].size() == 2);
  CHECK(r.experiment_steps[0] == 2 * setup_seed(config, 0).task.rows());
  CHECK(r.rows[0].err_sq < r.prior_metrics.squared);
}

TEST_CASE("comparison tables") {
  std::vector<ComparisonRow> rows;
  const double inf_err[] = {1.0, 2.0, 3.0}, rep_err[] = {2.0, 1.0, 6.0};
  for (std::uint64_t s = 0; s < 3; ++s) {
    rows.push_back({"informative", 1, 20, s, inf_err[s], VectorXd::Constant(3, 0.1 * (s + 1)), false});
    rows.push_back({"non_informative", 1, 20, s, rep_err[s], VectorXd::Constant(3, 0.2), false});
  }
  const std::string csv = comparison_csv(rows, 3);
  CHECK(csv.substr(0, csv.find('\n')) == "arm,budget,seed,err_sq,err_abs_x,err_abs_y,err_abs_z");
  const auto back = parse_comparison_csv(csv);
  REQUIRE(back.size() == rows.size());
  CHECK(comparison_csv(back, 3) == csv);

  const auto summary = summarize(rows);
  REQUIRE(summary.size() == 2);
  CHECK(summary[0].arm == "informative");
  CHECK(summary[0].mean_err_sq == doctest::Approx(2.0));
  CHECK(summary[0].median_err_sq == 2.0);
  CHECK(summary[0].mean_err_abs(0) == doctest::Approx(0.2));
  CHECK(summary[1].mean_err_sq == doctest::Approx(3.0));

  const auto imp = improvement(rows);
  REQUIRE(imp.size() == 1);
  CHECK(imp[0].pairs == 3);
  CHECK(imp[0].wins == 2);
  // Per-seed improvements 50%, -100%, 50%.
  CHECK(imp[0].median_percent == doctest::Approx(50.0));
  CHECK(imp[0].percent_of_means == doctest::Approx(100.0 * (3.0 - 2.0) / 3.0));
}

TEST_CASE("compare_arms writes the tree and resumes to the same result") {
  ExperimentConfig config = small_config();
  config.arms = {Arm::kInformative, Arm::kNonInformative, Arm::kNoLearning};
  config.seeds = 2;
  config.budgets = {20, 40};
  const std::string dir = scratch("resume");
  const ExperimentResult full = compare_arms(config, dir, 1);
  const std::string expected = read_text(dir + "/comparison.csv");
  CHECK(full.rows.size() == 3 * 2 * 2);
  for (const char* f : {"comparison.csv", "iterations.csv", "summary.csv", "improvement.csv",
                        "prior/seed_0/model/model.kv", "informative/1/seed_1/selection.csv",
                        "informative/1/seed_1/record.kv", "informative/1/seed_1/model_budget_40/dataset.csv",
                        "non_informative/1/seed_0/executed.csv", "no_learning/1/seed_0/record.kv"}) {
    CHECK_MESSAGE(std::filesystem::exists(dir + "/" + f), f);
  }

  // Interrupted: the second seed never finished and the tables were not written.
  std::filesystem::remove(dir + "/seeds/seed_1.csv");
  std::filesystem::remove(dir + "/comparison.csv");
  const ExperimentResult resumed = compare_arms(config, dir, 1, true);
  CHECK(read_text(dir + "/comparison.csv") == expected);
  CHECK(comparison_csv(resumed.rows, 3) == expected);

  config.arms = {Arm::kInformative};
  CHECK_THROWS_AS(compare_arms(config, "", 1), InputError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("correlation study on oadi") {
  ExperimentConfig config = small_config("oadi");
  const CorrelationResult r = correlation_study(config, 0, "", 1);
  REQUIRE(r.points.size() == 6);
  CHECK(r.points.back().is_task);
  const std::string csv = r.to_csv();
  CHECK(csv.substr(0, csv.find('\n')) == "candidate_id,is_task,cost,error,test_error,closed_loop_error,diverged");
  std::vector<double> cost, error;
  for (const auto& p : r.points) {
    if (p.diverged) continue;
    cost.push_back(p.cost);
    error.push_back(p.error(r.metric));
  }
  CHECK(r.rho == doctest::Approx(spearman(cost, error).rho));
  const CorrelationResult again = correlation_study(config, 0, "", 1);
  CHECK(again.to_csv() == csv);
}
