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


#include "infotraj/region/region.hpp"

#include <algorithm>
#include <limits>

#include "infotraj/csv.hpp"
#include "infotraj/simulate/rollout.hpp"

namespace infotraj::region {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kRolloutTag = 0x726f6c6c;
constexpr std::uint64_t kGridTag = 0x67726964;
}  // namespace

double RegionEstimate::volume() const {
  if (samples_drawn <= 0) return 0.0;
  return sampling_box.volume() * static_cast<double>(points.rows()) / samples_drawn;
}

bool RegionEstimate::contains(const VectorXd& z) const {
  return distance_to_sources(z, source_rollouts, weights) <= epsilon;
}

std::string RegionEstimate::to_csv() const {
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < points.cols(); ++j) header.push_back("dim_" + std::to_string(j));
  CsvWriter csv(header);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) csv.cell(points(i, j));
    csv.end_row();
  }
  return csv.str();
}

KeyValue RegionEstimate::metadata() const {
  KeyValue kv;
  kv.set("epsilon", epsilon);
  kv.set("M", static_cast<int>(source_rollouts.size()));
  kv.set("seed", std::to_string(seed));
  kv.set("weights", weights);
  kv.set("samples_drawn", samples_drawn);
  kv.set("retained", static_cast<int>(points.rows()));
  kv.set("volume", volume());
  return kv;
}

double weighted_distance(const VectorXd& a, const VectorXd& b, const VectorXd& weights) {
  return (weights.array() * (a - b).array()).matrix().norm();
}

double distance_to_sources(const VectorXd& z, const std::vector<MatrixXd>& sources,
                           const VectorXd& weights) {
  double best_sq = kInf;
  const Eigen::Index d = z.size();
  for (const MatrixXd& s : sources) {
    require(s.cols() == d, "region: source dimension mismatch");
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < d && acc < best_sq; ++j) {
        const double v = weights(j) * (z(j) - s(i, j));
        acc += v * v;
      }
      best_sq = std::min(best_sq, acc);
    }
  }
  return std::sqrt(best_sq);
}

VectorXd default_weights(const std::vector<MatrixXd>& sources, double floor_fraction) {
  require(!sources.empty(), "default_weights: no sources");
  const Eigen::Index d = sources.front().cols();
  VectorXd lo = VectorXd::Constant(d, kInf), hi = VectorXd::Constant(d, -kInf);
  for (const MatrixXd& s : sources) {
    if (s.rows() == 0) continue;
    lo = lo.cwiseMin(s.colwise().minCoeff().transpose());
    hi = hi.cwiseMax(s.colwise().maxCoeff().transpose());
  }
  require(lo.allFinite() && hi.allFinite(), "default_weights: sources are empty");
  VectorXd range = hi - lo;
  const double largest = range.maxCoeff();
  const double floor = largest > 0.0 ? floor_fraction * largest : 1.0;
  range = range.cwiseMax(floor);
  return range.cwiseInverse();
}

Box feature_bounds(const systems::Plant& plant, const gp::FeatureMap& features) {
  if (features.mode == gp::FeatureMode::kInput) return plant.input_bounds();
  VectorXd lo(features.dim()), hi(features.dim());
  lo << plant.state_bounds().lower, plant.input_bounds().lower;
  hi << plant.state_bounds().upper, plant.input_bounds().upper;
  return make_box(lo, hi);
}

RegionEstimate region_from_candidates(const std::vector<MatrixXd>& sources,
                                      const MatrixXd& candidates, const VectorXd& weights,
                                      double epsilon) {
  require(epsilon >= 0.0, "region: epsilon must be non-negative");
  require(weights.size() == candidates.cols() && (weights.array() > 0.0).all(),
          "region: weights must be positive, one per dimension");
  RegionEstimate r;
  r.epsilon = epsilon;
  r.weights = weights;
  r.source_rollouts = sources;
  r.samples_drawn = static_cast<int>(candidates.rows());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
    if (distance_to_sources(candidates.row(i).transpose(), sources, weights) <= epsilon) keep.push_back(i);
  }
  r.points.resize(static_cast<Eigen::Index>(keep.size()), candidates.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) r.points.row(static_cast<Eigen::Index>(i)) = candidates.row(keep[i]);
  if (candidates.rows() > 0) {
    r.sampling_box = make_box(candidates.colwise().minCoeff().transpose(),
                              candidates.colwise().maxCoeff().transpose());
  }
  return r;
}

RegionEstimate region_from_sources(const std::vector<MatrixXd>& sources, const Box& bounds,
                                   const VectorXd& weights, double epsilon, int grid_size,
                                   std::uint64_t seed) {
  require(grid_size >= 1, "region: grid size must be positive");
  require(epsilon >= 0.0, "region: epsilon must be non-negative");
  require(weights.size() == bounds.dim() && (weights.array() > 0.0).all(),
          "region: weights must be positive, one per dimension");
  // Continuous samples hit the epsilon = 0 set with probability zero; the
  // shrunken sampling box below would otherwise collapse onto the sources.
  if (epsilon == 0.0) throw EmptyRegionError("region: epsilon = 0 retains no samples");
  const Eigen::Index d = bounds.dim();
  VectorXd lo = VectorXd::Constant(d, kInf), hi = VectorXd::Constant(d, -kInf);
  for (const MatrixXd& s : sources) {
    require(s.cols() == d, "region: source dimension mismatch");
    if (s.rows() == 0) continue;
    lo = lo.cwiseMin(s.colwise().minCoeff().transpose());
    hi = hi.cwiseMax(s.colwise().maxCoeff().transpose());
  }
  if (!lo.allFinite()) throw EmptyRegionError("region: no source points");
  const VectorXd pad = epsilon * weights.cwiseInverse();
  lo = (lo - pad).cwiseMax(bounds.lower);
  hi = (hi + pad).cwiseMin(bounds.upper);
  if ((lo.array() > hi.array()).any()) {
    throw EmptyRegionError("region: source rollouts lie outside the feature bounds");
  }

  Rng rng(derive_seed(seed, kGridTag));
  MatrixXd grid(grid_size, d);
  for (Eigen::Index i = 0; i < grid_size; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) grid(i, j) = rng.uniform(lo(j), hi(j));
  }
  RegionEstimate r = region_from_candidates(sources, grid, weights, epsilon);
  r.sampling_box = Box{lo, hi};
  r.seed = seed;
  if (r.points.rows() == 0) {
    throw EmptyRegionError("region: no samples within epsilon = " + format_double(epsilon) +
                           "; raise epsilon or the grid size");
  }
  return r;
}

RegionEstimate estimate_region(const systems::Plant& plant, const control::ControllerGains& gains,
                               const gp::ResidualModel& model, const MatrixXd& x_ref,
                               const RegionOptions& options) {
  require(options.rollouts >= 1, "estimate_region: M must be at least 1");
  const auto m = static_cast<std::size_t>(options.rollouts);
  std::vector<simulate::RolloutResult> runs(m);
  parallel_for(m, [&](std::size_t j) {
    runs[j] = simulate::belief_rollout(plant, gains, model, x_ref,
                                       derive_seed(options.seed, kRolloutTag, j),
                                       options.sample_mode, options.anchors);
  });
  std::vector<MatrixXd> sources;
  for (const auto& r : runs) sources.push_back(r.features);
  const VectorXd weights = options.weights.value_or(default_weights(sources));

  double epsilon = 0.0;
  if (options.epsilon) {
    epsilon = *options.epsilon;
  } else {
    // Commanded input w versus achieved net input w + B^-1 g' along the runs.
    const gp::FeatureMap& f = model.features();
    const MatrixXd b_inv = plant.input_matrix().inverse();
    double total = 0.0;
    long long count = 0;
    for (const auto& r : runs) {
      for (Eigen::Index k = 0; k < r.targets.rows(); ++k) {
        VectorXd diff = VectorXd::Zero(f.dim());
        diff.segment(f.input_offset(), f.input_dim) = b_inv * r.clean_targets.row(k).transpose();
        total += (weights.array() * diff.array()).matrix().norm();
        ++count;
      }
    }
    require(count > 0, "estimate_region: task rollouts produced no data");
    epsilon = total / static_cast<double>(count);
  }
  const Box bounds = feature_bounds(plant, model.features());
  if (options.epsilon) {
    return region_from_sources(sources, bounds, weights, epsilon, options.grid_size, options.seed);
  }
  // A derived epsilon can be too small for the grid to hit the tube around the
  // rollouts; widen it until samples are retained.
  for (int attempt = 0;; ++attempt) {
    try {
      return region_from_sources(sources, bounds, weights, epsilon, options.grid_size, options.seed);
    } catch (const EmptyRegionError&) {
      if (attempt >= 40 || epsilon <= 0.0) throw;
      epsilon *= 2.0;
    }
  }
}

MatrixXd sample_evaluation_set(const RegionEstimate& region, int count, std::uint64_t seed) {
  if (region.size() == 0) throw EmptyRegionError("sample_evaluation_set: empty region");
  require(count >= 1, "sample_evaluation_set: S must be positive");
  Rng rng(seed);
  MatrixXd out(count, region.points.cols());
  const auto n = static_cast<std::size_t>(region.size());
  for (Eigen::Index i = 0; i < count; ++i) out.row(i) = region.points.row(static_cast<Eigen::Index>(rng.index(n)));
  return out;
}

InformativeCost informative_cost(const gp::ResidualModel& model, const std::vector<gp::Dataset>& data,
                                 const MatrixXd& eval_points) {
  require(eval_points.cols() == model.feature_dim(), "informative_cost: evaluation dimension mismatch");
  const gp::ResidualModel conditioned = data.empty() ? model : model.condition(data);
  InformativeCost c;
  c.per_point = conditioned.variance_trace_rows(eval_points);
  c.value = c.per_point.sum();
  return c;
}

double mc_integral(const VectorXd& per_point, double volume) {
  require(per_point.size() > 0, "mc_integral: no points");
  return volume / static_cast<double>(per_point.size()) * per_point.sum();
}

}  // namespace infotraj::region
