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

#ifndef INFOTRAJ_GP_RESIDUAL_MODEL_HPP_
#define INFOTRAJ_GP_RESIDUAL_MODEL_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "infotraj/common.hpp"
#include "infotraj/gp/gaussian_process.hpp"
#include "infotraj/gp/kernel.hpp"

namespace infotraj::gp {

/// Which part of the state-input pair z = (x, u) the residual GP sees.
enum class FeatureMode { kInput, kStateInput };

FeatureMode parse_feature_mode(const std::string& name);
std::string to_string(FeatureMode mode);

struct FeatureMap {
  FeatureMode mode = FeatureMode::kInput;
  int state_dim = 0;
  int input_dim = 0;

  int dim() const { return mode == FeatureMode::kInput ? input_dim : state_dim + input_dim; }
  VectorXd operator()(const VectorXd& x, const VectorXd& u) const;
  /// Features of a full z = (x, u) vector.
  VectorXd from_z(const VectorXd& z) const;
  /// Index of the first input component inside a feature vector.
  int input_offset() const { return mode == FeatureMode::kInput ? 0 : state_dim; }
};

/// Training data for one output channel.
struct Dataset {
  MatrixXd inputs;  // one row per point
  VectorXd targets;
  std::vector<std::int64_t> trajectory_ids;

  Dataset() = default;
  Dataset(MatrixXd x, VectorXd y, std::vector<std::int64_t> ids = {});

  Eigen::Index size() const { return inputs.rows(); }
  Eigen::Index dim() const { return inputs.cols(); }
  void validate() const;
  Dataset subset(const std::vector<Eigen::Index>& rows) const;
  Dataset concat(const Dataset& other) const;
};

/// Splits a multi-output observation matrix (one column per channel) into
/// per-channel datasets that share inputs.
std::vector<Dataset> split_channels(const MatrixXd& inputs, const MatrixXd& targets,
                                    const std::vector<std::int64_t>& trajectory_ids);

struct Posterior {
  VectorXd mean;
  VectorXd variance;
};

using Channel = GaussianProcess<double>;

/// Independent single-output GPs, one per residual channel. Copies share the
/// underlying channels; conditioning and refitting return new models.
class ResidualModel {
 public:
  ResidualModel() = default;
  ResidualModel(FeatureMap features, const std::vector<Kernel>& kernels);
  ResidualModel(FeatureMap features, std::vector<std::shared_ptr<const Channel>> channels,
                std::vector<std::vector<std::int64_t>> trajectory_ids);

  const FeatureMap& features() const { return features_; }
  int num_channels() const { return static_cast<int>(channels_.size()); }
  int feature_dim() const { return features_.dim(); }
  const Channel& channel(int c) const { return *channels_.at(static_cast<std::size_t>(c)); }
  std::vector<Kernel> kernels() const;
  std::vector<Dataset> datasets() const;
  Eigen::Index total_points() const;

  Posterior posterior(const VectorXd& feature) const;
  VectorXd mean(const VectorXd& feature) const;
  VectorXd mean_at(const VectorXd& x, const VectorXd& u) const { return mean(features_(x, u)); }

  /// Sum over channels of the predictive variance at each row of `queries`.
  VectorXd variance_trace_rows(const MatrixXd& queries) const;

  ResidualModel condition(const std::vector<Dataset>& per_channel) const;
  ResidualModel with_kernels(const std::vector<Kernel>& kernels) const;

 private:
  FeatureMap features_;
  std::vector<std::shared_ptr<const Channel>> channels_;
  std::vector<std::vector<std::int64_t>> trajectory_ids_;
};

Posterior posterior(const ResidualModel& model, const VectorXd& query);
ResidualModel condition(const ResidualModel& model, const std::vector<Dataset>& new_points);

}  // namespace infotraj::gp

#endif  // INFOTRAJ_GP_RESIDUAL_MODEL_HPP_
