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

#ifndef INFOTRAJ_GP_IO_HPP_
#define INFOTRAJ_GP_IO_HPP_

#include <string>
#include <vector>

#include "infotraj/kv.hpp"
#include "infotraj/gp/residual_model.hpp"

namespace infotraj::gp {

// Kernel text: signal_variance=, lengthscale_0=, ..., noise_variance=
KeyValue kernel_to_kv(const Kernel& kernel);
Kernel kernel_from_kv(const KeyValue& kv);

// Dataset CSV: dim_0..dim_{d-1},target,channel,trajectory_id
std::string datasets_to_csv(const std::vector<Dataset>& per_channel);
std::vector<Dataset> datasets_from_csv(const std::string& text, int channels);

// Snapshot directory: model.kv, kernel_<c>.kv, dataset.csv
void save_model(const ResidualModel& model, const std::string& directory);
ResidualModel load_model(const std::string& directory);

}  // namespace infotraj::gp

#endif  // INFOTRAJ_GP_IO_HPP_
