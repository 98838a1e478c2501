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


// Task-relevant region estimate and the Monte-Carlo informative cost.
//
// The region lives in GP feature space. A uniform sample is kept when its
// weighted distance ||diag(weights) (z - z_src)|| to some source-rollout point
// is at most epsilon. Samples are drawn from the feature bounds intersected
// with the source bounding box inflated by epsilon / weight per dimension; no
// point outside that box can pass the test, so this equals rejection sampling
// from the full bounds with a higher acceptance rate.

#ifndef INFOTRAJ_REGION_REGION_HPP_
#define INFOTRAJ_REGION_REGION_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "infotraj/common.hpp"
#include "infotraj/control/controller.hpp"
#include "infotraj/gp/function_sample.hpp"
#include "infotraj/gp/residual_model.hpp"
#include "infotraj/kv.hpp"
#include "infotraj/systems/plant.hpp"

namespace infotraj::region {

struct RegionEstimate {
  MatrixXd points;                        // retained feature vectors, one per row
  double epsilon = 0.0;
  VectorXd weights;                       // per feature dimension
  std::vector<MatrixXd> source_rollouts;  // feature rows of each source rollout
  Box sampling_box;
  int samples_drawn = 0;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return points.rows(); }
  /// Box volume times the retained fraction.
  double volume() const;
  /// Membership test against the source rollouts.
  bool contains(const VectorXd& z) const;

  std::string to_csv() const;
  KeyValue metadata() const;
};

double weighted_distance(const VectorXd& a, const VectorXd& b, const VectorXd& weights);

/// Smallest weighted distance from z to any row of any source.
double distance_to_sources(const VectorXd& z, const std::vector<MatrixXd>& sources,
                           const VectorXd& weights);

/// Default weights: 1 / range of the source features per dimension. Ranges
/// below `floor_fraction` of the largest range are raised to it so that a
/// nearly constant coordinate does not dominate the norm.
VectorXd default_weights(const std::vector<MatrixXd>& sources, double floor_fraction = 0.1);

/// Feature-space bounds of a plant for a feature map.
Box feature_bounds(const systems::Plant& plant, const gp::FeatureMap& features);

/// Keeps the rows of `candidates` within epsilon of the sources.
RegionEstimate region_from_candidates(const std::vector<MatrixXd>& sources,
                                      const MatrixXd& candidates, const VectorXd& weights,
                                      double epsilon);

/// Uniform sampling in the (inflated, clipped) box, then the membership test.
RegionEstimate region_from_sources(const std::vector<MatrixXd>& sources, const Box& bounds,
                                   const VectorXd& weights, double epsilon, int grid_size,
                                   std::uint64_t seed);

struct RegionOptions {
  int rollouts = 3;      // M task belief rollouts
  int grid_size = 4096;  // uniform samples
  std::optional<double> epsilon;
  std::optional<VectorXd> weights;
  gp::SampleMode sample_mode = gp::SampleMode::kJointAnchors;
  int anchors = 30;
  std::uint64_t seed = 0;
};

/// M belief rollouts of the task under model samples, then the region around
/// them. Default epsilon: mean weighted distance between commanded and
/// achieved input (w versus w + B^-1 g') along those rollouts, doubled until
/// the grid retains points.
RegionEstimate estimate_region(const systems::Plant& plant, const control::ControllerGains& gains,
                               const gp::ResidualModel& model, const MatrixXd& x_ref,
                               const RegionOptions& options);

/// S draws with replacement from the region points.
MatrixXd sample_evaluation_set(const RegionEstimate& region, int count, std::uint64_t seed);

struct InformativeCost {
  double value = 0.0;  // sum of per_point; the V / S factor is dropped
  VectorXd per_point;  // trace of the posterior variance at each evaluation point
};

/// Conditions a copy of `model` on `data` and sums posterior variance traces
/// over the evaluation points.
InformativeCost informative_cost(const gp::ResidualModel& model, const std::vector<gp::Dataset>& data,
                                 const MatrixXd& eval_points);

/// (V / S) * sum(per_point): the Monte-Carlo integral of the variance field.
double mc_integral(const VectorXd& per_point, double volume);

}  // namespace infotraj::region

#endif  // INFOTRAJ_REGION_REGION_HPP_
