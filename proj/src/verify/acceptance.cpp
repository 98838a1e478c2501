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


#include "infotraj/verify/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <sstream>

#include "infotraj/csv.hpp"
#include "infotraj/gp/residual_model.hpp"
#include "infotraj/pipeline/experiment.hpp"
#include "infotraj/pipeline/statistics.hpp"
#include "infotraj/region/region.hpp"
#include "infotraj/simulate/rollout.hpp"
#include "infotraj/trajgen/deviation.hpp"
#include "infotraj/trajgen/selection.hpp"
#include "infotraj/trajgen/tasks.hpp"

namespace infotraj::verify {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

MatrixXd uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

gp::Kernel random_kernel(Rng& rng, Eigen::Index d, double noise_lo, double noise_hi) {
  gp::Kernel k;
  k.signal_variance = rng.uniform(0.3, 3.0);
  k.lengthscales = uniform_matrix(rng, d, 1, 0.3, 2.0);
  k.noise_variance = rng.uniform(noise_lo, noise_hi);
  k.validate();
  return k;
}

gp::ResidualModel one_channel(const gp::Kernel& k, const MatrixXd& x, const VectorXd& y) {
  const gp::FeatureMap f{gp::FeatureMode::kInput, 0, static_cast<int>(k.dim())};
  const gp::ResidualModel empty(f, {k});
  if (x.rows() == 0) return empty;
  return empty.condition({gp::Dataset(x, y)});
}

// Textbook formulas with an explicit LU inverse; shares no code with the GP.
double se_kernel(const gp::Kernel& k, const VectorXd& a, const VectorXd& b) {
  double r2 = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double u = (a(i) - b(i)) / k.lengthscales(i);
    r2 += u * u;
  }
  return k.signal_variance * std::exp(-0.5 * r2);
}

std::pair<double, double> dense_posterior(const gp::Kernel& k, const MatrixXd& x, const VectorXd& y,
                                          const VectorXd& q) {
  const Eigen::Index n = x.rows();
  const double prior = k.signal_variance + k.noise_variance;
  if (n == 0) return {0.0, prior};
  MatrixXd gram(n, n);
  VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ks(i) = se_kernel(k, q, x.row(i).transpose());
    for (Eigen::Index j = 0; j < n; ++j) gram(i, j) = se_kernel(k, x.row(i).transpose(), x.row(j).transpose());
    gram(i, i) += k.noise_variance;
  }
  const MatrixXd inv = gram.fullPivLu().inverse();
  return {ks.dot(inv * y), prior - ks.dot(inv * ks)};
}

pipeline::ExperimentConfig load_preset(const VerifyOptions& options, const std::string& name) {
  return pipeline::ExperimentConfig::from_kv(KeyValue::load(options.config_dir + "/" + name));
}

}  // namespace

std::string CheckResult::line() const {
  std::ostringstream out;
  out << (ok() ? "PASS" : "FAIL") << "  " << id << ' ' << name << "  " << detail << "  ("
      << fmt("%.1f", seconds) << " s / " << fmt("%.0f", limit_seconds) << " s)";
  if (passed && !within_time()) out << " over time limit";
  return out.str();
}

CheckResult check_gp_oracle() {
  CheckResult r{1, "gp_oracle_equivalence", false, "", 0.0, 10.0};
  Rng rng(0x6f72636c);
  double worst_mean = 0.0, worst_var = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(8));
    const Eigen::Index n = static_cast<Eigen::Index>(rng.index(21));
    const gp::Kernel k = random_kernel(rng, d, 1e-3, 0.2);
    const MatrixXd x = uniform_matrix(rng, n, d, -2.0, 2.0);
    const VectorXd y = uniform_matrix(rng, n, 1, -1.5, 1.5);
    const gp::ResidualModel model = one_channel(k, x, y);
    for (int q = 0; q < 5; ++q) {
      const VectorXd query = uniform_matrix(rng, d, 1, -2.5, 2.5);
      const auto [mean, var] = dense_posterior(k, x, y, query);
      const gp::Posterior p = model.posterior(query);
      worst_mean = std::max(worst_mean, std::abs(p.mean(0) - mean));
      worst_var = std::max(worst_var, std::abs(p.variance(0) - var));
    }
  }
  r.passed = worst_mean < 1e-10 && worst_var < 1e-10;
  r.detail = "max |dmean|=" + fmt("%.2e", worst_mean) + " max |dvar|=" + fmt("%.2e", worst_var) +
             " over 200 instances (tol 1e-10)";
  return r;
}

CheckResult check_variance_monotonicity() {
  CheckResult r{2, "variance_monotonicity", false, "", 0.0, 10.0};
  Rng rng(0x6d6f6e6f);
  double worst = -std::numeric_limits<double>::infinity();
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(8));
    const Eigen::Index n = static_cast<Eigen::Index>(rng.index(21));
    const gp::Kernel k = random_kernel(rng, d, 0.0, 0.2);
    const MatrixXd x = uniform_matrix(rng, n, d, -2.0, 2.0);
    const gp::ResidualModel model = one_channel(k, x, uniform_matrix(rng, n, 1, -1, 1));
    const gp::ResidualModel more =
        model.condition({gp::Dataset(uniform_matrix(rng, 1, d, -2.0, 2.0), uniform_matrix(rng, 1, 1, -1, 1))});
    const VectorXd q = uniform_matrix(rng, d, 1, -3.0, 3.0);
    const double increase = more.posterior(q).variance(0) - model.posterior(q).variance(0);
    worst = std::max(worst, increase);
    if (increase > 1e-12) ++violations;
  }
  r.passed = violations == 0;
  r.detail = std::to_string(violations) + "/100 violations, max increase " + fmt("%.2e", worst) +
             " (tol 1e-12)";
  return r;
}

CheckResult check_compensation() {
  CheckResult r{3, "compensation_gate", false, "", 0.0, 5.0};
  const systems::Plant plant = systems::builtin("oadi", 0);
  const control::ControllerGains gains = control::default_gains(plant);
  trajgen::TaskOptions task;
  task.horizon = 500;
  const MatrixXd ref = trajgen::task_reference(plant, task);
  const auto perfect = simulate::verify_compensation(plant, gains, ref, simulate::Compensation::kTrueResidual);
  const auto none = simulate::verify_compensation(plant, gains, ref, simulate::Compensation::kNone);
  r.passed = !perfect.diverged && perfect.max_error < 1e-6 && none.steady_state_error > 0.01;
  r.detail = "true residual max err " + fmt("%.2e", perfect.max_error) + " (< 1e-6), none steady " +
             fmt("%.3g", none.steady_state_error) + " (> 0.01), N=500";
  return r;
}

CheckResult check_mc_integral() {
  CheckResult r{4, "mc_integration", false, "", 0.0, 30.0};
  // Variance field of a 2-d GP with one observation at x0:
  //   v(x) = s + n - s^2 exp(-|x - x0|^2_L) / (s + n)
  // whose box integral factors into 1-d Gaussian integrals (erf).
  const double s = 1.2, n = 0.05;
  gp::Kernel k;
  k.signal_variance = s;
  k.lengthscales = (VectorXd(2) << 0.4, 0.7).finished();
  k.noise_variance = n;
  const VectorXd x0 = (VectorXd(2) << 0.3, -0.2).finished();
  const Box box = make_box((VectorXd(2) << -1.0, -1.5).finished(), (VectorXd(2) << 1.0, 1.0).finished());
  const gp::ResidualModel model = one_channel(k, x0.transpose(), VectorXd::Zero(1));

  double gauss = 1.0;
  for (int i = 0; i < 2; ++i) {
    // exp(-(x - c)^2 / l^2) integrates to (l sqrt(pi) / 2) [erf((b - c) / l) - erf((a - c) / l)].
    const double l = k.lengthscales(i);
    gauss *= 0.5 * l * std::sqrt(M_PI) *
             (std::erf((box.upper(i) - x0(i)) / l) - std::erf((box.lower(i) - x0(i)) / l));
  }
  const double exact = (s + n) * box.volume() - s * s / (s + n) * gauss;

  const int samples = 100000;
  Rng rng(0x6d63696e);
  MatrixXd points(samples, 2);
  for (int i = 0; i < samples; ++i)
    for (int j = 0; j < 2; ++j) points(i, j) = rng.uniform(box.lower(j), box.upper(j));
  const region::InformativeCost cost = region::informative_cost(model, {}, points);
  const double estimate = region::mc_integral(cost.per_point, box.volume());
  const double rel = std::abs(estimate - exact) / exact;

  // The same estimator on the reduction field alone, which is far from flat.
  const double reduction_exact = s * s / (s + n) * gauss;
  const double reduction = (s + n) * box.volume() - estimate;
  const double rel_reduction = std::abs(reduction - reduction_exact) / reduction_exact;

  r.passed = rel < 0.02 && rel_reduction < 0.02;
  r.detail = "rel err " + fmt("%.2e", rel) + ", on the variance reduction " + fmt("%.2e", rel_reduction) +
             " at S=1e5 (tol 2%)";
  return r;
}

CheckResult check_region_soundness() {
  CheckResult r{5, "region_soundness", false, "", 0.0, 30.0};
  long long points = 0, outside = 0;
  for (int instance = 0; instance < 20; ++instance) {
    pipeline::ExperimentConfig config;
    config.plant = instance % 2 == 0 ? "oadi" : "attitude3";
    config.fit_enabled = false;
    const auto seed = static_cast<std::uint64_t>(1000 + instance);
    const pipeline::SeedSetup setup = pipeline::setup_seed(config, seed);
    systems::SealedPlant plant(setup.plant);
    const pipeline::PriorResult prior = pipeline::build_prior(plant, setup, config);
    region::RegionOptions options;
    options.grid_size = 2048;
    options.seed = derive_seed(seed, 0x72656769);
    const region::RegionEstimate est =
        region::estimate_region(setup.plant, setup.gains, prior.model, setup.task, options);
    // Brute-force membership, independent of the region code.
    for (Eigen::Index i = 0; i < est.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const MatrixXd& src : est.source_rollouts) {
        for (Eigen::Index j = 0; j < src.rows(); ++j) {
          const VectorXd diff = est.weights.cwiseProduct((est.points.row(i) - src.row(j)).transpose());
          best = std::min(best, diff.norm());
        }
      }
      ++points;
      if (!(best <= est.epsilon * (1.0 + 1e-12))) ++outside;
    }
  }
  r.passed = points > 0 && outside == 0;
  r.detail = std::to_string(points - outside) + "/" + std::to_string(points) +
             " region points within epsilon over 20 instances";
  return r;
}

CheckResult check_band_limit() {
  CheckResult r{6, "band_limit", false, "", 0.0, 10.0};
  const systems::Plant plant = systems::builtin("attitude3", 0);
  const MatrixXd task = trajgen::task_reference(plant);
  trajgen::SelectionConfig sc;
  const trajgen::CandidateCaps caps = trajgen::candidate_caps(plant, task, sc);
  const auto candidates = trajgen::sample_candidates(100, caps, 0x62616e64);
  const int n = caps.bin_horizon;
  const double T = caps.sampling_time;
  double worst = 0.0;
  for (const auto& params : candidates) {
    const MatrixXd dev = trajgen::deviation_sequence(params, n - 1, T, plant.state_dim());
    for (Eigen::Index axis = 0; axis < dev.cols(); ++axis) {
      // Plain DFT over one window; bin p sits at p / (n T) Hz.
      double total = 0.0, above = 0.0;
      for (int p = 0; p <= n / 2; ++p) {
        std::complex<double> acc = 0.0;
        for (int k = 0; k < n; ++k) acc += dev(k, axis) * std::polar(1.0, -2.0 * M_PI * p * k / n);
        const double weight = (p == 0 || 2 * p == n) ? 1.0 : 2.0;
        const double e = weight * std::norm(acc);
        total += e;
        if (p / (n * T) > caps.f_max + 1e-9) above += e;
      }
      if (total > 0.0) worst = std::max(worst, above / total);
    }
  }
  r.passed = worst < 0.01;
  r.detail = "max energy fraction above f_max " + fmt("%.2e", worst) + " over 100 candidates (tol 1%)";
  return r;
}

CheckResult check_correlation(const VerifyOptions& options) {
  CheckResult r{7, "cost_error_correlation", false, "", 0.0, 120.0};
  const pipeline::ExperimentConfig config = load_preset(options, "correlation_oadi.kv");
  const pipeline::CorrelationResult c = pipeline::correlation_study(config, config.master_seed, "", options.jobs);
  r.passed = !c.degenerate && c.rho >= 0.5;
  r.detail = "spearman rho=" + fmt("%.3f", c.rho) + " (>= 0.5) over " + std::to_string(c.points.size()) +
             " candidates, seed " + std::to_string(config.master_seed) +
             (c.excluded.empty() ? "" : ", " + std::to_string(c.excluded.size()) + " diverged");
  return r;
}

CheckResult check_informative_ordering(const VerifyOptions& options) {
  CheckResult r{8, "informative_vs_replay", false, "", 0.0, 600.0};
  const pipeline::ExperimentConfig config = load_preset(options, "ordering_attitude3.kv");
  const pipeline::ExperimentResult result = pipeline::compare_arms(config, "", options.jobs);
  int wins = 0, pairs = 0;
  bool medians_positive = !result.improvement.empty();
  std::ostringstream medians;
  for (const auto& row : result.improvement) {
    wins += row.wins;
    pairs += row.pairs;
    medians_positive = medians_positive && row.median_percent > 0.0;
    medians << (medians.tellp() > 0 ? " " : "") << row.budget << ":" << fmt("%+.1f%%", row.median_percent);
  }
  const double rate = pairs > 0 ? static_cast<double>(wins) / pairs : 0.0;
  r.passed = medians_positive && rate >= 0.7;
  r.detail = "median improvement by budget [" + medians.str() + "] (> 0), wins " + std::to_string(wins) +
             "/" + std::to_string(pairs) + " = " + fmt("%.0f%%", 100.0 * rate) + " (>= 70%), " +
             std::to_string(config.seeds) + " seeds";
  return r;
}

CheckResult check_generalization(const VerifyOptions& options) {
  CheckResult r{9, "generalization", false, "", 0.0, 600.0};
  const pipeline::ExperimentConfig config = load_preset(options, "generalization_attitude3.kv");
  const pipeline::ExperimentResult result = pipeline::compare_arms(config, "", options.jobs);
  const int budget = config.budgets.back();
  std::map<std::uint64_t, VectorXd> informative, replay;
  for (const auto& row : result.rows) {
    if (row.budget != budget) continue;
    if (row.arm == "informative") informative[row.seed] = row.err_abs;
    if (row.arm == "non_informative") replay[row.seed] = row.err_abs;
  }
  const Eigen::Index axes = informative.empty() ? 0 : informative.begin()->second.size();
  int axes_won = 0;
  std::ostringstream votes;
  for (Eigen::Index a = 0; a < axes; ++a) {
    // Both arms start from the same prior, so a larger error reduction is a
    // smaller final error.
    int yes = 0, total = 0;
    for (const auto& [seed, err] : informative) {
      const auto it = replay.find(seed);
      if (it == replay.end()) continue;
      ++total;
      if (err(a) <= it->second(a)) ++yes;
    }
    if (2 * yes > total) ++axes_won;
    votes << (a ? " " : "") << "axis" << a << ":" << yes << "/" << total;
  }
  r.passed = axes_won >= 2;
  r.detail = "informative >= replay reduction at scale " + fmt("%.2f", config.eval_scale) + ", budget " +
             std::to_string(budget) + " [" + votes.str() + "], " + std::to_string(axes_won) +
             " of " + std::to_string(axes) + " axes by majority (>= 2)";
  return r;
}

CheckResult check_determinism(const VerifyOptions& options) {
  CheckResult r{10, "determinism", false, "", 0.0, 300.0};
  require(static_cast<bool>(options.run_cli), "check_determinism: no command runner");
  const std::string config = options.config_dir + "/determinism.kv";
  std::string outputs[2];
  int status[2];
  for (int i = 0; i < 2; ++i) {
    const std::string dir = options.work_dir + "/determinism_run" + std::to_string(i);
    std::filesystem::remove_all(dir);
    status[i] = options.run_cli({"run", "--config", config, "--outdir", dir});
    outputs[i] = status[i] == 0 ? read_text(dir + "/comparison.csv") : "";
  }
  const bool identical = status[0] == 0 && status[1] == 0 && !outputs[0].empty() && outputs[0] == outputs[1];
  r.passed = identical;
  r.detail = status[0] != 0 || status[1] != 0
                 ? "run exited with " + std::to_string(status[0]) + "/" + std::to_string(status[1])
                 : std::string(identical ? "comparison.csv byte-identical" : "comparison.csv differs") +
                       " across two runs (" + std::to_string(outputs[0].size()) + " bytes)";
  return r;
}

std::vector<Check> all_checks() {
  return {
      {1, "gp_oracle_equivalence", [](const VerifyOptions&) { return check_gp_oracle(); }},
      {2, "variance_monotonicity", [](const VerifyOptions&) { return check_variance_monotonicity(); }},
      {3, "compensation_gate", [](const VerifyOptions&) { return check_compensation(); }},
      {4, "mc_integration", [](const VerifyOptions&) { return check_mc_integral(); }},
      {5, "region_soundness", [](const VerifyOptions&) { return check_region_soundness(); }},
      {6, "band_limit", [](const VerifyOptions&) { return check_band_limit(); }},
      {7, "cost_error_correlation", check_correlation},
      {8, "informative_vs_replay", check_informative_ordering},
      {9, "generalization", check_generalization},
      {10, "determinism", check_determinism},
  };
}

std::vector<CheckResult> run_checks(const VerifyOptions& options, const std::vector<int>& ids,
                                    const std::function<void(const CheckResult&)>& report) {
  std::vector<CheckResult> results;
  for (const Check& check : all_checks()) {
    if (!ids.empty() && std::find(ids.begin(), ids.end(), check.id) == ids.end()) continue;
    const auto start = Clock::now();
    CheckResult result;
    try {
      result = check.run(options);
    } catch (const std::exception& e) {
      result = CheckResult{check.id, check.name, false, std::string("error: ") + e.what(), 0.0, 0.0};
    }
    result.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (result.limit_seconds == 0.0) result.limit_seconds = std::numeric_limits<double>::infinity();
    if (report) report(result);
    results.push_back(result);
  }
  return results;
}

}  // namespace infotraj::verify
