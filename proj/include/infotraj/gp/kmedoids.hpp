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

#ifndef INFOTRAJ_GP_KMEDOIDS_HPP_
#define INFOTRAJ_GP_KMEDOIDS_HPP_

#include <cstdint>
#include <vector>

#include "infotraj/common.hpp"
#include "infotraj/gp/residual_model.hpp"

namespace infotraj::gp {

struct KMedoidsResult {
  std::vector<Eigen::Index> medoids;     // row indices, ascending
  std::vector<Eigen::Index> assignment;  // medoid slot of every point
  double cost = 0.0;                     // sum of squared distances to the medoid
  std::vector<double> cost_history;      // after BUILD, then after every accepted swap
};

/// PAM: greedy BUILD followed by first-improvement SWAP over a seeded visiting
/// order, using squared Euclidean distance between rows of `points`. Swap
/// deltas for all medoids are evaluated in one pass per candidate using the
/// nearest / second-nearest caches.
KMedoidsResult kmedoids(const MatrixXd& points, Eigen::Index k, std::uint64_t seed);

/// Total cost of a medoid set (for oracles and diagnostics).
double medoid_cost(const MatrixXd& points, const std::vector<Eigen::Index>& medoids);

/// The k medoid points of `dataset` (clustered on inputs).
Dataset kmedoids_subsample(const Dataset& dataset, Eigen::Index k, std::uint64_t seed);

/// Row indices chosen by k-medoids; returns all rows when k >= rows.
std::vector<Eigen::Index> kmedoids_rows(const MatrixXd& points, Eigen::Index k, std::uint64_t seed);

}  // namespace infotraj::gp

#endif  // INFOTRAJ_GP_KMEDOIDS_HPP_
