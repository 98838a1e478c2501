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


#include "infotraj/trajgen/deviation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "infotraj/kv.hpp"

namespace infotraj::trajgen {

void DeviationParams::validate() const {
  require(axes.size() == tones.size(), "deviation: one tone list per axis");
  require(f_max > 0.0, "deviation: f_max must be positive");
  require(integrations == 0 || integrations == 1, "deviation: integrations must be 0 or 1");
  for (const auto& list : tones) {
    for (const Tone& t : list) {
      if (!(t.frequency > 0.0 && t.frequency <= f_max)) {
        throw InputError("deviation: frequency " + format_double(t.frequency) +
                         " Hz outside (0, " + format_double(f_max) + "]");
      }
      require(std::isfinite(t.amplitude), "deviation: non-finite amplitude");
    }
  }
}

int DeviationParams::coefficient_count() const {
  int count = 0;
  for (const auto& list : tones) count += 2 * static_cast<int>(list.size());
  return count;
}

bool DeviationParams::is_zero() const {
  for (const auto& list : tones) {
    for (const Tone& t : list) {
      if (t.amplitude != 0.0) return false;
    }
  }
  return true;
}

std::vector<double> DeviationParams::frequencies() const {
  std::vector<double> out;
  for (const auto& list : tones) {
    for (const Tone& t : list) out.push_back(t.frequency);
  }
  return out;
}

std::vector<double> DeviationParams::amplitudes() const {
  std::vector<double> out;
  for (const auto& list : tones) {
    for (const Tone& t : list) out.push_back(t.amplitude);
  }
  return out;
}

VectorXd deviation(const DeviationParams& params, int k, double sampling_time, int state_dim) {
  VectorXd d = VectorXd::Zero(state_dim);
  for (std::size_t a = 0; a < params.axes.size(); ++a) {
    const int axis = params.axes[a];
    require(axis >= 0 && axis < state_dim, "deviation: axis out of range");
    double v = 0.0;
    for (const Tone& t : params.tones[a]) {
      const double omega = 2.0 * M_PI * t.frequency;
      const double phase = omega * static_cast<double>(k) * sampling_time;
      v += params.integrations == 0 ? t.amplitude * std::sin(phase)
                                    : t.amplitude / omega * (1.0 - std::cos(phase));
    }
    d(axis) += v;
  }
  return d;
}

MatrixXd deviation_sequence(const DeviationParams& params, int horizon, double sampling_time,
                            int state_dim) {
  params.validate();
  require(horizon >= 0, "deviation: negative horizon");
  MatrixXd out(horizon + 1, state_dim);
  for (int k = 0; k <= horizon; ++k) out.row(k) = deviation(params, k, sampling_time, state_dim).transpose();
  return out;
}

MatrixXd apply_deviation(const MatrixXd& task, const DeviationParams& params, double sampling_time) {
  if (params.is_zero()) return task;
  return task + deviation_sequence(params, static_cast<int>(task.rows()) - 1, sampling_time,
                                   static_cast<int>(task.cols()));
}

VectorXd default_amplitude_caps(const MatrixXd& task, const std::vector<int>& axes, double fraction) {
  require(fraction >= 0.0, "amplitude caps: fraction must be non-negative");
  const VectorXd peak = task.cwiseAbs().colwise().maxCoeff().transpose();
  const double floor = 0.5 * peak.maxCoeff();
  VectorXd caps(static_cast<Eigen::Index>(axes.size()));
  for (std::size_t a = 0; a < axes.size(); ++a) {
    caps(static_cast<Eigen::Index>(a)) = fraction * std::max(peak(axes[a]), floor);
  }
  return caps;
}

std::vector<DeviationParams> sample_candidates(int count, const CandidateCaps& caps,
                                               std::uint64_t seed) {
  require(count >= 1, "sample_candidates: count must be positive");
  require(caps.amplitude.size() == static_cast<Eigen::Index>(caps.axes.size()),
          "sample_candidates: one amplitude cap per axis");
  require(caps.tones >= 1 && caps.bin_horizon >= 1 && caps.sampling_time > 0.0,
          "sample_candidates: bad caps");
  const double bin = 1.0 / (caps.bin_horizon * caps.sampling_time);
  const int bins = static_cast<int>(std::floor(caps.f_max / bin + 1e-9));
  require(bins >= 1, "sample_candidates: no DFT bin below f_max");
  Rng rng(seed);
  std::vector<DeviationParams> out;
  for (int c = 0; c < count; ++c) {
    DeviationParams p;
    p.axes = caps.axes;
    p.f_max = caps.f_max;
    p.integrations = caps.integrations;
    for (std::size_t a = 0; a < caps.axes.size(); ++a) {
      std::vector<Tone> list;
      for (int q = 0; q < caps.tones; ++q) {
        const int b = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(bins)));
        const double cap = caps.amplitude(static_cast<Eigen::Index>(a));
        list.push_back({std::min(b * bin, caps.f_max), rng.uniform(-cap, cap)});
      }
      p.tones.push_back(std::move(list));
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace infotraj::trajgen
