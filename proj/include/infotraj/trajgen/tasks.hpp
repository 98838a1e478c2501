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


#ifndef INFOTRAJ_TRAJGEN_TASKS_HPP_
#define INFOTRAJ_TRAJGEN_TASKS_HPP_

#include <optional>
#include <vector>

#include "infotraj/common.hpp"
#include "infotraj/systems/plant.hpp"

namespace infotraj::trajgen {

struct TaskOptions {
  std::optional<double> amplitude;  // rad for attitude3, position units for oadi
  std::optional<double> period;     // seconds
  std::optional<int> horizon;       // N; defaults to one period
  double scale = 1.0;               // multiplies the whole reference
};

/// attitude3: angular-velocity figure-8, the derivative of the attitude
/// figure-8 roll = a sin(2 pi t / P), pitch = (a / 2) sin(4 pi t / P), with
/// zero yaw rate. oadi: position sine with the matching velocity per axis.
MatrixXd task_reference(const systems::Plant& plant, const TaskOptions& options = {});

/// Where deviations act. attitude3's state is the angular velocity and its
/// input a torque, so deviations are angular accelerations integrated once (1).
/// oadi reaches any next state in one step and takes them on the state (0).
int deviation_integrations(const systems::Plant& plant);

/// State axes that receive deviations (all of them for the built-in plants).
std::vector<int> excited_axes(const systems::Plant& plant);

}  // namespace infotraj::trajgen

#endif  // INFOTRAJ_TRAJGEN_TASKS_HPP_
