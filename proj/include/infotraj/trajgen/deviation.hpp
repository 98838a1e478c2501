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


// Deviations from a task reference, built from real sinusoids:
//
//   s_a[k] = sum_q alpha_q sin(2 pi f_q k T)
//
// on every excited state axis a, and zero elsewhere. With one integration the
// signal acts on the state derivative and the state deviation is its exact
// integral from k = 0:
//
//   delta_a[k] = sum_q alpha_q / (2 pi f_q) (1 - cos(2 pi f_q k T))

#ifndef INFOTRAJ_TRAJGEN_DEVIATION_HPP_
#define INFOTRAJ_TRAJGEN_DEVIATION_HPP_

#include <cstdint>
#include <vector>

#include "infotraj/common.hpp"

namespace infotraj::trajgen {

struct Tone {
  double frequency = 0.0;  // Hz
  double amplitude = 0.0;  // state units
};

struct DeviationParams {
  std::vector<int> axes;                // excited state axes
  std::vector<std::vector<Tone>> tones;  // per excited axis
  double f_max = 2.0;
  int integrations = 0;  // 0: signal on the state, 1: on its derivative

  /// Throws InputError when a frequency is outside (0, f_max].
  void validate() const;
  int coefficient_count() const;
  bool is_zero() const;
  /// f_1.., alpha_1.. flattened axis-major.
  std::vector<double> frequencies() const;
  std::vector<double> amplitudes() const;
};

/// State deviation delta x[k] for a state of dimension `state_dim`.
VectorXd deviation(const DeviationParams& params, int k, double sampling_time, int state_dim);

/// Rows k = 0..horizon.
MatrixXd deviation_sequence(const DeviationParams& params, int horizon, double sampling_time,
                            int state_dim);

/// task + delta, bit-identical to the task when all amplitudes are zero.
MatrixXd apply_deviation(const MatrixXd& task, const DeviationParams& params, double sampling_time);

struct CandidateCaps {
  std::vector<int> axes;
  VectorXd amplitude;   // per excited axis
  double f_max = 2.0;
  int tones = 2;
  int integrations = 0;
  // Frequencies are drawn from the DFT bins p / (bin_horizon T) in (0, f_max],
  // so that a window of bin_horizon samples holds whole periods.
  int bin_horizon = 400;
  double sampling_time = 0.01;
};

/// 25 percent of the task peak per axis by default; axes whose peak is below
/// half of the largest peak use half of the largest peak instead.
VectorXd default_amplitude_caps(const MatrixXd& task, const std::vector<int>& axes,
                                double fraction = 0.25);

std::vector<DeviationParams> sample_candidates(int count, const CandidateCaps& caps,
                                               std::uint64_t seed);

}  // namespace infotraj::trajgen

#endif  // INFOTRAJ_TRAJGEN_DEVIATION_HPP_
