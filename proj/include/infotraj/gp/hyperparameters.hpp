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

#ifndef INFOTRAJ_GP_HYPERPARAMETERS_HPP_
#define INFOTRAJ_GP_HYPERPARAMETERS_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "infotraj/gp/kernel.hpp"
#include "infotraj/gp/residual_model.hpp"

namespace infotraj::gp {

struct FitOptions {
  int restarts = 5;
  int max_evaluations = 300;  // per restart
  std::uint64_t seed = 0;
};

/// Log marginal likelihood of `dataset` under `kernel`; -inf when the
/// covariance cannot be factorized.
double log_marginal_likelihood(const Dataset& dataset, const Kernel& kernel);

/// Multi-restart Nelder-Mead ascent of the log marginal likelihood over
/// log-parameters, projected onto `bounds`. Restart 0 starts from `init`, the
/// rest from seeded uniform draws inside the bounds. The result never has a
/// lower likelihood than `init`.
Kernel fit_hyperparameters(const Dataset& dataset, const Kernel& init, const KernelBounds& bounds,
                           const FitOptions& options = {});

/// Refits every channel on its own data.
ResidualModel refit(const ResidualModel& model, const KernelBounds& bounds,
                    const FitOptions& options = {});

struct NelderMeadResult {
  VectorXd argmin;
  double value = 0.0;
  int evaluations = 0;
};

/// Box-projected Nelder-Mead minimizer.
NelderMeadResult nelder_mead(const std::function<double(const VectorXd&)>& f, const VectorXd& start,
                             const VectorXd& lower, const VectorXd& upper, double step,
                             int max_evaluations, double tolerance = 1e-9);

}  // namespace infotraj::gp

#endif  // INFOTRAJ_GP_HYPERPARAMETERS_HPP_
