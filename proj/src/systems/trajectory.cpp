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


#include "infotraj/systems/trajectory.hpp"

#include "infotraj/csv.hpp"

namespace infotraj::systems {

Trajectory::Trajectory(MatrixXd x, MatrixXd u, double t)
    : states(std::move(x)), inputs(std::move(u)), sampling_time(t) {
  validate();
}

void Trajectory::validate() const {
  require(states.rows() >= 1, "trajectory: empty");
  require(inputs.rows() == states.rows() || inputs.size() == 0,
          "trajectory: states and inputs disagree on length");
  require(sampling_time > 0.0, "trajectory: sampling time must be positive");
  require(states.allFinite() && inputs.allFinite(), "trajectory: non-finite entry");
}

std::string Trajectory::to_csv() const {
  std::vector<std::string> header = {"k", "t"};
  for (Eigen::Index j = 0; j < states.cols(); ++j) header.push_back("x_" + std::to_string(j));
  for (Eigen::Index j = 0; j < inputs.cols(); ++j) header.push_back("u_" + std::to_string(j));
  CsvWriter csv(header);
  for (Eigen::Index k = 0; k < states.rows(); ++k) {
    csv.cell(static_cast<long long>(k)).cell(static_cast<double>(k) * sampling_time);
    for (Eigen::Index j = 0; j < states.cols(); ++j) csv.cell(states(k, j));
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) csv.cell(inputs(k, j));
    csv.end_row();
  }
  return csv.str();
}

Trajectory Trajectory::from_csv(const std::string& text) {
  const CsvTable table = parse_csv(text);
  Eigen::Index n = 0, m = 0;
  while (table.column("x_" + std::to_string(n)) >= 0) ++n;
  while (table.column("u_" + std::to_string(m)) >= 0) ++m;
  const auto rows = static_cast<Eigen::Index>(table.rows.size());
  require(rows >= 1 && n >= 1, "trajectory csv: no states");
  MatrixXd x(rows, n), u(rows, m);
  for (Eigen::Index k = 0; k < rows; ++k) {
    const auto r = static_cast<std::size_t>(k);
    for (Eigen::Index j = 0; j < n; ++j) x(k, j) = table.number(r, "x_" + std::to_string(j));
    for (Eigen::Index j = 0; j < m; ++j) u(k, j) = table.number(r, "u_" + std::to_string(j));
  }
  const double t = rows > 1 ? table.number(1, "t") : 0.01;
  return Trajectory(std::move(x), std::move(u), t);
}

VectorXd column_peak(const MatrixXd& m) {
  if (m.rows() == 0) return VectorXd::Zero(m.cols());
  return m.cwiseAbs().colwise().maxCoeff().transpose();
}

}  // namespace infotraj::systems
