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

#include "infotraj/gp/function_sample.hpp"

#include <cmath>

namespace infotraj::gp {

SampleMode parse_sample_mode(const std::string& name) {
  if (name == "joint") return SampleMode::kJointAnchors;
  if (name == "pointwise") return SampleMode::kPointwise;
  throw InputError("unknown sample mode '" + name + "' (expected joint|pointwise)");
}

ResidualSample sample_function(const ResidualModel& model, const MatrixXd& anchors,
                               std::uint64_t seed, SampleMode mode) {
  if (anchors.rows() == 0) throw InputError("sample_function: anchor_points must be non-empty");
  if (anchors.cols() != model.feature_dim()) {
    throw InputError("sample_function: anchor dimension mismatch");
  }
  ResidualSample sample;
  sample.model_ = model;
  sample.mode_ = mode;
  sample.anchors_ = anchors;
  sample.rng_ = Rng(seed);
  sample.anchor_values_.resize(anchors.rows(), model.num_channels());
  if (mode == SampleMode::kPointwise) return sample;

  Rng rng(seed);
  for (int c = 0; c < model.num_channels(); ++c) {
    const Channel& ch = model.channel(c);
    const MatrixXd cov = ch.latent_covariance(anchors);
    // The posterior covariance is exactly singular at noise-free training
    // inputs, so the jitter is referenced to the prior scale and never zero.
    const auto factor =
        factorize_spd<double>(cov, ch.kernel().signal_variance, /*first_level=*/1);
    const MatrixXd l = factor.llt.matrixL();
    const VectorXd eps = rng.normal_vector(anchors.rows());

    // With s = mu_A + L eps, the conditional-mean weights are
    // Sigma_AA^-1 (s - mu_A) = L^-T eps.
    VectorXd anchor_weights = factor.llt.matrixU().solve(eps);
    VectorXd data_weights = ch.alpha();
    if (ch.size() > 0) {
      const MatrixXd k_xa = ch.kernel().cross(ch.inputs(), anchors);
      data_weights -= ch.solve(k_xa * anchor_weights);
    }
    sample.anchor_values_.col(c) = ch.mean_rows(anchors) + l * eps;
    sample.weights_.push_back({std::move(data_weights), std::move(anchor_weights)});
  }
  return sample;
}

VectorXd ResidualSample::operator()(const VectorXd& feature) {
  const int channels = model_.num_channels();
  VectorXd out(channels);
  if (mode_ == SampleMode::kPointwise) {
    const Posterior p = model_.posterior(feature);
    for (int c = 0; c < channels; ++c) {
      const double latent = std::max(0.0, p.variance(c) - model_.channel(c).kernel().noise_variance);
      out(c) = p.mean(c) + std::sqrt(latent) * rng_.normal();
    }
    return out;
  }
  if (feature.size() != model_.feature_dim()) {
    throw InputError("ResidualSample: query dimension mismatch");
  }
  for (int c = 0; c < channels; ++c) {
    const Channel& ch = model_.channel(c);
    const auto& w = weights_[static_cast<std::size_t>(c)];
    double value = ch.kernel().column(anchors_, feature).dot(w.anchor_weights);
    if (ch.size() > 0) value += ch.kernel().column(ch.inputs(), feature).dot(w.data_weights);
    out(c) = value;
  }
  return out;
}

}  // namespace infotraj::gp
