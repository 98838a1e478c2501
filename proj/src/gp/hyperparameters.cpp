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

#include "infotraj/gp/hyperparameters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace infotraj::gp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Parameter layout: [log signal_variance, log lengthscale_0..d-1, log noise_variance].
VectorXd pack(const Kernel& k) {
  VectorXd theta(k.dim() + 2);
  theta(0) = std::log(k.signal_variance);
  theta.segment(1, k.dim()) = k.lengthscales.array().log();
  theta(k.dim() + 1) = std::log(std::max(k.noise_variance, 1e-300));
  return theta;
}

Kernel unpack(const VectorXd& theta) {
  const Eigen::Index d = theta.size() - 2;
  Kernel k;
  k.signal_variance = std::exp(theta(0));
  k.lengthscales = theta.segment(1, d).array().exp();
  k.noise_variance = std::exp(theta(d + 1));
  return k;
}

void log_bounds(const KernelBounds& b, Eigen::Index d, VectorXd& lower, VectorXd& upper) {
  lower.resize(d + 2);
  upper.resize(d + 2);
  lower(0) = std::log(b.signal_variance_min);
  upper(0) = std::log(b.signal_variance_max);
  lower.segment(1, d).setConstant(std::log(b.lengthscale_min));
  upper.segment(1, d).setConstant(std::log(b.lengthscale_max));
  lower(d + 1) = std::log(std::max(b.noise_variance_min, 1e-300));
  upper(d + 1) = std::log(b.noise_variance_max);
  if (!(lower.array() <= upper.array()).all()) throw InputError("fit: inverted bounds");
}

VectorXd project(const VectorXd& x, const VectorXd& lower, const VectorXd& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

}  // namespace

double log_marginal_likelihood(const Dataset& dataset, const Kernel& kernel) {
  try {
    const Channel gp(kernel, dataset.inputs, dataset.targets);
    const double lml = gp.log_marginal_likelihood();
    return std::isfinite(lml) ? lml : -kInf;
  } catch (const NumericalError&) {
    return -kInf;
  }
}

NelderMeadResult nelder_mead(const std::function<double(const VectorXd&)>& f, const VectorXd& start,
                             const VectorXd& lower, const VectorXd& upper, double step,
                             int max_evaluations, double tolerance) {
  const Eigen::Index n = start.size();
  std::vector<VectorXd> simplex;
  std::vector<double> values;
  int evaluations = 0;
  auto eval = [&](const VectorXd& x) {
    ++evaluations;
    const double v = f(x);
    return std::isnan(v) ? kInf : v;
  };

  simplex.push_back(project(start, lower, upper));
  values.push_back(eval(simplex[0]));
  for (Eigen::Index i = 0; i < n; ++i) {
    VectorXd x = simplex[0];
    // Step inward when the start sits on the upper bound.
    x(i) += (x(i) + step <= upper(i)) ? step : -step;
    x = project(x, lower, upper);
    simplex.push_back(x);
    values.push_back(eval(x));
  }

  std::vector<std::size_t> order(simplex.size());
  while (evaluations < max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];

    double diameter = 0.0;
    for (const auto& x : simplex) diameter = std::max(diameter, (x - simplex[best]).cwiseAbs().maxCoeff());
    if (std::isfinite(values[worst]) &&
        std::abs(values[worst] - values[best]) <= tolerance * (1.0 + std::abs(values[best])) &&
        diameter < 1e-6) {
      break;
    }

    VectorXd centroid = VectorXd::Zero(n);
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= static_cast<double>(n);

    const VectorXd reflected = project(centroid + (centroid - simplex[worst]), lower, upper);
    const double f_reflected = eval(reflected);
    if (f_reflected < values[best]) {
      const VectorXd expanded = project(centroid + 2.0 * (centroid - simplex[worst]), lower, upper);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    const bool outside = f_reflected < values[worst];
    const VectorXd contracted =
        outside ? project(centroid + 0.5 * (reflected - centroid), lower, upper)
                : project(centroid + 0.5 * (simplex[worst] - centroid), lower, upper);
    const double f_contracted = eval(contracted);
    if (f_contracted < (outside ? f_reflected : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    // Shrink towards the best vertex.
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = eval(simplex[i]);
    }
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  const std::size_t best = static_cast<std::size_t>(best_it - values.begin());
  return {simplex[best], values[best], evaluations};
}

Kernel fit_hyperparameters(const Dataset& dataset, const Kernel& init, const KernelBounds& bounds,
                           const FitOptions& options) {
  dataset.validate();
  init.validate();
  if (dataset.size() < 2) throw InputError("fit_hyperparameters: need at least 2 points");
  if (dataset.dim() != init.dim()) throw InputError("fit_hyperparameters: dimension mismatch");

  VectorXd lower, upper;
  log_bounds(bounds, init.dim(), lower, upper);
  auto objective = [&dataset](const VectorXd& theta) {
    return -log_marginal_likelihood(dataset, unpack(theta));
  };

  Kernel best = init;
  double best_value = objective(pack(init));
  bool any_success = std::isfinite(best_value);

  Rng rng(options.seed);
  const int restarts = std::max(options.restarts, 1);
  for (int r = 0; r < restarts; ++r) {
    VectorXd start(lower.size());
    if (r == 0) {
      start = project(pack(init), lower, upper);
    } else {
      for (Eigen::Index i = 0; i < start.size(); ++i) start(i) = rng.uniform(lower(i), upper(i));
    }
    const auto result = nelder_mead(objective, start, lower, upper, 0.5, options.max_evaluations);
    if (std::isfinite(result.value)) any_success = true;
    if (result.value < best_value) {
      best_value = result.value;
      best = unpack(result.argmin);
    }
  }
  if (!any_success) throw NumericalError("fit_hyperparameters: every restart failed to factorize");
  return best;
}

ResidualModel refit(const ResidualModel& model, const KernelBounds& bounds, const FitOptions& options) {
  std::vector<Kernel> kernels;
  for (int c = 0; c < model.num_channels(); ++c) {
    const Channel& ch = model.channel(c);
    if (ch.size() < 2) {
      kernels.push_back(ch.kernel());
      continue;
    }
    FitOptions channel_options = options;
    channel_options.seed = derive_seed(options.seed, static_cast<std::uint64_t>(c));
    const Dataset data(ch.inputs(), ch.targets());
    kernels.push_back(fit_hyperparameters(data, ch.kernel(), bounds, channel_options));
  }
  return model.with_kernels(kernels);
}

}  // namespace infotraj::gp
