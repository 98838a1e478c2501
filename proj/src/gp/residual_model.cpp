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

#include "infotraj/gp/residual_model.hpp"

namespace infotraj::gp {

FeatureMode parse_feature_mode(const std::string& name) {
  if (name == "input") return FeatureMode::kInput;
  if (name == "state_input") return FeatureMode::kStateInput;
  throw InputError("unknown feature mode '" + name + "' (expected input|state_input)");
}

std::string to_string(FeatureMode mode) {
  return mode == FeatureMode::kInput ? "input" : "state_input";
}

VectorXd FeatureMap::operator()(const VectorXd& x, const VectorXd& u) const {
  if (x.size() != state_dim || u.size() != input_dim) {
    throw InputError("FeatureMap: state/input dimension mismatch");
  }
  if (mode == FeatureMode::kInput) return u;
  VectorXd z(state_dim + input_dim);
  z << x, u;
  return z;
}

VectorXd FeatureMap::from_z(const VectorXd& z) const {
  if (z.size() != state_dim + input_dim) throw InputError("FeatureMap: z dimension mismatch");
  if (mode == FeatureMode::kInput) return z.tail(input_dim);
  return z;
}

Dataset::Dataset(MatrixXd x, VectorXd y, std::vector<std::int64_t> ids)
    : inputs(std::move(x)), targets(std::move(y)), trajectory_ids(std::move(ids)) {
  if (trajectory_ids.empty()) trajectory_ids.assign(static_cast<std::size_t>(inputs.rows()), 0);
  validate();
}

void Dataset::validate() const {
  if (inputs.rows() != targets.size()) throw InputError("Dataset: |inputs| != |targets|");
  if (static_cast<Eigen::Index>(trajectory_ids.size()) != inputs.rows()) {
    throw InputError("Dataset: one trajectory id per point required");
  }
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  Dataset out;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
  out.targets.resize(static_cast<Eigen::Index>(rows.size()));
  out.trajectory_ids.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i];
    if (r < 0 || r >= size()) throw InputError("Dataset::subset: row out of range");
    out.inputs.row(static_cast<Eigen::Index>(i)) = inputs.row(r);
    out.targets(static_cast<Eigen::Index>(i)) = targets(r);
    out.trajectory_ids[i] = trajectory_ids[static_cast<std::size_t>(r)];
  }
  return out;
}

Dataset Dataset::concat(const Dataset& other) const {
  if (size() == 0) return other;
  if (other.size() == 0) return *this;
  if (dim() != other.dim()) throw InputError("Dataset::concat: dimension mismatch");
  Dataset out;
  out.inputs.resize(size() + other.size(), dim());
  out.inputs << inputs, other.inputs;
  out.targets.resize(size() + other.size());
  out.targets << targets, other.targets;
  out.trajectory_ids = trajectory_ids;
  out.trajectory_ids.insert(out.trajectory_ids.end(), other.trajectory_ids.begin(),
                            other.trajectory_ids.end());
  return out;
}

std::vector<Dataset> split_channels(const MatrixXd& inputs, const MatrixXd& targets,
                                    const std::vector<std::int64_t>& trajectory_ids) {
  if (inputs.rows() != targets.rows()) throw InputError("split_channels: row count mismatch");
  std::vector<Dataset> out;
  out.reserve(static_cast<std::size_t>(targets.cols()));
  for (Eigen::Index c = 0; c < targets.cols(); ++c) {
    out.emplace_back(inputs, targets.col(c), trajectory_ids);
  }
  return out;
}

ResidualModel::ResidualModel(FeatureMap features, const std::vector<Kernel>& kernels)
    : features_(features) {
  for (const auto& k : kernels) {
    if (k.dim() != features_.dim()) {
      throw InputError("ResidualModel: kernel dimension does not match feature map");
    }
    channels_.push_back(std::make_shared<const Channel>(k));
    trajectory_ids_.emplace_back();
  }
}

ResidualModel::ResidualModel(FeatureMap features,
                             std::vector<std::shared_ptr<const Channel>> channels,
                             std::vector<std::vector<std::int64_t>> trajectory_ids)
    : features_(features), channels_(std::move(channels)), trajectory_ids_(std::move(trajectory_ids)) {
  if (trajectory_ids_.size() != channels_.size()) {
    throw InputError("ResidualModel: trajectory ids per channel required");
  }
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    if (channels_[c]->dim() != features_.dim()) {
      throw InputError("ResidualModel: channel dimension does not match feature map");
    }
    if (static_cast<Eigen::Index>(trajectory_ids_[c].size()) != channels_[c]->size()) {
      throw InputError("ResidualModel: trajectory ids do not match channel data");
    }
  }
}

std::vector<Kernel> ResidualModel::kernels() const {
  std::vector<Kernel> out;
  for (const auto& ch : channels_) out.push_back(ch->kernel());
  return out;
}

std::vector<Dataset> ResidualModel::datasets() const {
  std::vector<Dataset> out;
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    out.emplace_back(channels_[c]->inputs(), channels_[c]->targets(), trajectory_ids_[c]);
  }
  return out;
}

Eigen::Index ResidualModel::total_points() const {
  Eigen::Index n = 0;
  for (const auto& ch : channels_) n += ch->size();
  return n;
}

Posterior ResidualModel::posterior(const VectorXd& feature) const {
  if (feature.size() != feature_dim()) throw InputError("posterior: query dimension mismatch");
  Posterior out{VectorXd(num_channels()), VectorXd(num_channels())};
  for (int c = 0; c < num_channels(); ++c) {
    const auto [mu, var] = channels_[static_cast<std::size_t>(c)]->predict(feature);
    out.mean(c) = mu;
    out.variance(c) = var;
  }
  return out;
}

VectorXd ResidualModel::mean(const VectorXd& feature) const {
  if (feature.size() != feature_dim()) throw InputError("mean: query dimension mismatch");
  VectorXd out(num_channels());
  for (int c = 0; c < num_channels(); ++c) out(c) = channels_[static_cast<std::size_t>(c)]->mean(feature);
  return out;
}

VectorXd ResidualModel::variance_trace_rows(const MatrixXd& queries) const {
  if (queries.rows() > 0 && queries.cols() != feature_dim()) {
    throw InputError("variance_trace_rows: query dimension mismatch");
  }
  VectorXd total = VectorXd::Zero(queries.rows());
  for (const auto& ch : channels_) total += ch->variance_rows(queries);
  return total;
}

ResidualModel ResidualModel::condition(const std::vector<Dataset>& per_channel) const {
  if (per_channel.size() != channels_.size()) {
    throw InputError("condition: one dataset per channel required");
  }
  std::vector<std::shared_ptr<const Channel>> channels;
  std::vector<std::vector<std::int64_t>> ids = trajectory_ids_;
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    const Dataset& d = per_channel[c];
    d.validate();
    if (d.size() == 0) {
      channels.push_back(channels_[c]);
      continue;
    }
    if (d.dim() != feature_dim()) throw InputError("condition: dimension mismatch");
    channels.push_back(std::make_shared<const Channel>(channels_[c]->condition(d.inputs, d.targets)));
    ids[c].insert(ids[c].end(), d.trajectory_ids.begin(), d.trajectory_ids.end());
  }
  return ResidualModel(features_, std::move(channels), std::move(ids));
}

ResidualModel ResidualModel::with_kernels(const std::vector<Kernel>& kernels) const {
  if (kernels.size() != channels_.size()) throw InputError("with_kernels: one kernel per channel");
  std::vector<std::shared_ptr<const Channel>> channels;
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    if (kernels[c].dim() != feature_dim()) throw InputError("with_kernels: dimension mismatch");
    channels.push_back(std::make_shared<const Channel>(channels_[c]->with_kernel(kernels[c])));
  }
  return ResidualModel(features_, std::move(channels), trajectory_ids_);
}

Posterior posterior(const ResidualModel& model, const VectorXd& query) {
  return model.posterior(query);
}

ResidualModel condition(const ResidualModel& model, const std::vector<Dataset>& new_points) {
  return model.condition(new_points);
}

}  // namespace infotraj::gp
