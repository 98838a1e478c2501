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


#ifndef INFOTRAJ_SYSTEMS_TRAJECTORY_HPP_
#define INFOTRAJ_SYSTEMS_TRAJECTORY_HPP_

#include <string>

#include "infotraj/common.hpp"

namespace infotraj::systems {

/// States and inputs over a horizon N: both arrays have N + 1 rows.
struct Trajectory {
  MatrixXd states;
  MatrixXd inputs;
  double sampling_time = 0.01;

  Trajectory() = default;
  Trajectory(MatrixXd x, MatrixXd u, double t);

  int horizon() const { return static_cast<int>(states.rows()) - 1; }
  Eigen::Index state_dim() const { return states.cols(); }
  Eigen::Index input_dim() const { return inputs.cols(); }
  void validate() const;

  /// CSV with columns k,t,x_0..,u_0..
  std::string to_csv() const;
  static Trajectory from_csv(const std::string& text);
};

/// Peak absolute value per column.
VectorXd column_peak(const MatrixXd& m);

}  // namespace infotraj::systems

#endif  // INFOTRAJ_SYSTEMS_TRAJECTORY_HPP_
