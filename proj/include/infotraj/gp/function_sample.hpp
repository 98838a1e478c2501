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

#ifndef INFOTRAJ_GP_FUNCTION_SAMPLE_HPP_
#define INFOTRAJ_GP_FUNCTION_SAMPLE_HPP_

#include <cstdint>
#include <vector>

#include "infotraj/common.hpp"
#include "infotraj/gp/residual_model.hpp"

namespace infotraj::gp {

enum class SampleMode {
  // Joint draw at anchor points, extended to the whole feature space by the
  // posterior conditional mean given those draws.
  kJointAnchors,
  // Independent draw from the marginal posterior at every call.
  kPointwise,
};

SampleMode parse_sample_mode(const std::string& name);

/// A residual function g' drawn from the model posterior. Joint-anchor
/// samples are pure functions of the feature vector; pointwise samples carry
/// their own stream and must stay confined to one rollout.
class ResidualSample {
 public:
  VectorXd operator()(const VectorXd& feature);

  SampleMode mode() const { return mode_; }
  const MatrixXd& anchors() const { return anchors_; }
  /// Values drawn at the anchors (rows = anchors, cols = channels).
  const MatrixXd& anchor_values() const { return anchor_values_; }

 private:
  friend ResidualSample sample_function(const ResidualModel&, const MatrixXd&, std::uint64_t,
                                        SampleMode);

  struct ChannelWeights {
    VectorXd data_weights;    // multiplies k(z, X)
    VectorXd anchor_weights;  // multiplies k(z, A)
  };

  ResidualModel model_;
  SampleMode mode_ = SampleMode::kJointAnchors;
  MatrixXd anchors_;
  MatrixXd anchor_values_;
  std::vector<ChannelWeights> weights_;
  Rng rng_{0};
};

/// Draws g' from `model`. `anchors` holds one feature vector per row; in
/// pointwise mode they are ignored apart from the non-empty check.
ResidualSample sample_function(const ResidualModel& model, const MatrixXd& anchors,
                               std::uint64_t seed, SampleMode mode = SampleMode::kJointAnchors);

}  // namespace infotraj::gp

#endif  // INFOTRAJ_GP_FUNCTION_SAMPLE_HPP_
