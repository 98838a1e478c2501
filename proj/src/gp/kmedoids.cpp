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

#include "infotraj/gp/kmedoids.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace infotraj::gp {

namespace {

using Index = Eigen::Index;
constexpr double kInf = std::numeric_limits<double>::infinity();

MatrixXd squared_distances(const MatrixXd& points) {
  const Index n = points.rows();
  MatrixXd d(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) {
      const double v = (points.row(i) - points.row(j)).squaredNorm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

struct Caches {
  std::vector<Index> nearest;  // medoid slot
  VectorXd d1;
  VectorXd d2;
};

Caches build_caches(const MatrixXd& d, const std::vector<Index>& medoids) {
  const Index n = d.rows();
  Caches c{std::vector<Index>(static_cast<std::size_t>(n), 0), VectorXd::Constant(n, kInf),
           VectorXd::Constant(n, kInf)};
  for (Index o = 0; o < n; ++o) {
    for (std::size_t s = 0; s < medoids.size(); ++s) {
      const double v = d(o, medoids[s]);
      if (v < c.d1(o)) {
        c.d2(o) = c.d1(o);
        c.d1(o) = v;
        c.nearest[static_cast<std::size_t>(o)] = static_cast<Index>(s);
      } else if (v < c.d2(o)) {
        c.d2(o) = v;
      }
    }
  }
  return c;
}

}  // namespace

double medoid_cost(const MatrixXd& points, const std::vector<Index>& medoids) {
  double cost = 0.0;
  for (Index o = 0; o < points.rows(); ++o) {
    double best = kInf;
    for (Index m : medoids) best = std::min(best, (points.row(o) - points.row(m)).squaredNorm());
    cost += best;
  }
  return cost;
}

KMedoidsResult kmedoids(const MatrixXd& points, Index k, std::uint64_t seed) {
  const Index n = points.rows();
  if (k <= 0) throw InputError("kmedoids: k must be positive");
  if (k > n) throw InputError("kmedoids: k exceeds the number of points");

  const MatrixXd d = squared_distances(points);
  std::vector<Index> medoids;
  std::vector<char> is_medoid(static_cast<std::size_t>(n), 0);

  // BUILD
  VectorXd nearest = VectorXd::Constant(n, kInf);
  {
    Index first = 0;
    double best = kInf;
    for (Index i = 0; i < n; ++i) {
      const double total = d.col(i).sum();
      if (total < best) {
        best = total;
        first = i;
      }
    }
    medoids.push_back(first);
    is_medoid[static_cast<std::size_t>(first)] = 1;
    nearest = d.col(first);
  }
  while (static_cast<Index>(medoids.size()) < k) {
    Index pick = -1;
    double best_gain = -1.0;
    for (Index i = 0; i < n; ++i) {
      if (is_medoid[static_cast<std::size_t>(i)]) continue;
      const double gain = (nearest - d.col(i)).cwiseMax(0.0).sum();
      if (gain > best_gain) {
        best_gain = gain;
        pick = i;
      }
    }
    medoids.push_back(pick);
    is_medoid[static_cast<std::size_t>(pick)] = 1;
    nearest = nearest.cwiseMin(d.col(pick));
  }

  Caches cache = build_caches(d, medoids);
  KMedoidsResult result;
  result.cost = cache.d1.sum();
  result.cost_history.push_back(result.cost);

  // SWAP
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

  VectorXd removal(k);
  auto update_removal = [&]() {
    removal.setZero();
    for (Index o = 0; o < n; ++o) {
      removal(cache.nearest[static_cast<std::size_t>(o)]) += cache.d2(o) - cache.d1(o);
    }
  };
  update_removal();

  // BUILD's first pick already minimizes the single-medoid cost.
  const int max_passes = k == 1 ? 0 : 100;
  for (int pass = 0; pass < max_passes; ++pass) {
    bool swapped = false;
    for (Index h : order) {
      if (is_medoid[static_cast<std::size_t>(h)]) continue;
      VectorXd delta = removal;
      double shared = 0.0;
      for (Index o = 0; o < n; ++o) {
        const double doh = d(o, h);
        const double d1 = cache.d1(o);
        const double d2 = cache.d2(o);
        const Index slot = cache.nearest[static_cast<std::size_t>(o)];
        if (doh < d1) {
          shared += doh - d1;
          delta(slot) += d1 - d2;
        } else if (doh < d2) {
          delta(slot) += doh - d2;
        }
      }
      Index slot = 0;
      const double best_delta = delta.minCoeff(&slot) + shared;
      if (best_delta < -1e-12 * (1.0 + result.cost)) {
        is_medoid[static_cast<std::size_t>(medoids[static_cast<std::size_t>(slot)])] = 0;
        medoids[static_cast<std::size_t>(slot)] = h;
        is_medoid[static_cast<std::size_t>(h)] = 1;
        cache = build_caches(d, medoids);
        update_removal();
        const double cost = cache.d1.sum();
        result.cost = std::min(cost, result.cost);
        result.cost_history.push_back(result.cost);
        swapped = true;
      }
    }
    if (!swapped) break;
  }

  // Canonical order: ascending row index, assignment re-mapped accordingly.
  std::sort(medoids.begin(), medoids.end());
  cache = build_caches(d, medoids);
  result.medoids = medoids;
  result.assignment = cache.nearest;
  result.cost = cache.d1.sum();
  return result;
}

std::vector<Index> kmedoids_rows(const MatrixXd& points, Index k, std::uint64_t seed) {
  if (k >= points.rows()) {
    std::vector<Index> all(static_cast<std::size_t>(points.rows()));
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  return kmedoids(points, k, seed).medoids;
}

Dataset kmedoids_subsample(const Dataset& dataset, Index k, std::uint64_t seed) {
  dataset.validate();
  if (k <= 0) throw InputError("kmedoids_subsample: k must be positive");
  if (k > dataset.size()) throw InputError("kmedoids_subsample: k exceeds dataset size");
  return dataset.subset(kmedoids(dataset.inputs, k, seed).medoids);
}

}  // namespace infotraj::gp
