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


#include "infotraj/trajgen/tasks.hpp"

#include <cmath>

namespace infotraj::trajgen {

MatrixXd task_reference(const systems::Plant& plant, const TaskOptions& options) {
  const double t = plant.sampling_time();
  const int n = plant.state_dim();
  if (plant.name() == "attitude3") {
    const double a = options.amplitude.value_or(0.45);
    const double period = options.period.value_or(4.0);
    require(a >= 0.0 && period > 0.0, "task: bad amplitude or period");
    const int horizon = options.horizon.value_or(static_cast<int>(std::lround(period / t)));
    require(horizon >= 1, "task: horizon must be positive");
    const double w = 2.0 * M_PI / period;
    MatrixXd x = MatrixXd::Zero(horizon + 1, n);
    for (int k = 0; k <= horizon; ++k) {
      const double time = k * t;
      x(k, 0) = options.scale * a * w * std::cos(w * time);
      x(k, 1) = options.scale * 0.5 * a * 2.0 * w * std::cos(2.0 * w * time);
    }
    return x;
  }
  if (plant.name() == "oadi") {
    const double a = options.amplitude.value_or(1.0);
    const double period = options.period.value_or(5.0);
    require(a >= 0.0 && period > 0.0, "task: bad amplitude or period");
    const int horizon = options.horizon.value_or(static_cast<int>(std::lround(period / t)));
    require(horizon >= 1, "task: horizon must be positive");
    const double w = 2.0 * M_PI / period;
    MatrixXd x(horizon + 1, n);
    for (int k = 0; k <= horizon; ++k) {
      for (int axis = 0; axis < n / 2; ++axis) {
        const double phase = w * k * t + 0.5 * M_PI * axis;
        x(k, 2 * axis) = options.scale * a * std::sin(phase);
        x(k, 2 * axis + 1) = options.scale * a * w * std::cos(phase);
      }
    }
    return x;
  }
  throw InputError("task: no built-in task for plant '" + plant.name() + "'");
}

int deviation_integrations(const systems::Plant& plant) { return plant.name() == "attitude3" ? 1 : 0; }

std::vector<int> excited_axes(const systems::Plant& plant) {
  std::vector<int> axes;
  for (int i = 0; i < plant.state_dim(); ++i) axes.push_back(i);
  return axes;
}

}  // namespace infotraj::trajgen
