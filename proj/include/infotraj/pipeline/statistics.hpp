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


#ifndef INFOTRAJ_PIPELINE_STATISTICS_HPP_
#define INFOTRAJ_PIPELINE_STATISTICS_HPP_

#include <vector>

namespace infotraj::pipeline {

double mean(const std::vector<double>& values);
/// Sample standard deviation; 0 for fewer than two values.
double stddev(const std::vector<double>& values);
/// Average of the two middle values for even sizes. NaN when empty.
double median(std::vector<double> values);

/// 1-based ranks, ties share their average rank.
std::vector<double> average_ranks(const std::vector<double>& values);

struct RankCorrelation {
  double rho = 0.0;
  bool degenerate = false;  // fewer than two points or a constant side
};

/// Spearman rank correlation: Pearson correlation of the average ranks.
RankCorrelation spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace infotraj::pipeline

#endif  // INFOTRAJ_PIPELINE_STATISTICS_HPP_
