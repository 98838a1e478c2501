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


// Acceptance checks. Each check builds its own instances from a seed, runs
// them against an independent oracle or an ordering claim, and reports one
// pass/fail line with the measured value and the wall time against a limit.

#ifndef INFOTRAJ_VERIFY_ACCEPTANCE_HPP_
#define INFOTRAJ_VERIFY_ACCEPTANCE_HPP_

#include <functional>
#include <string>
#include <vector>

namespace infotraj::verify {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double limit_seconds = 0.0;

  bool within_time() const { return seconds <= limit_seconds; }
  bool ok() const { return passed && within_time(); }
  /// "PASS  7 cost_error_correlation  rho=0.6 ... (12.3 s / 120 s)"
  std::string line() const;
};

// Runs the CLI with the given arguments; returns its exit status.
using CommandRunner = std::function<int(const std::vector<std::string>& args)>;

struct VerifyOptions {
  std::string config_dir;  // holds the acceptance presets
  std::string work_dir;    // scratch space for the determinism runs
  CommandRunner run_cli;   // used by the determinism check
  int jobs = 0;
};

CheckResult check_gp_oracle();
CheckResult check_variance_monotonicity();
CheckResult check_compensation();
CheckResult check_mc_integral();
CheckResult check_region_soundness();
CheckResult check_band_limit();
CheckResult check_correlation(const VerifyOptions& options);
CheckResult check_informative_ordering(const VerifyOptions& options);
CheckResult check_generalization(const VerifyOptions& options);
CheckResult check_determinism(const VerifyOptions& options);

struct Check {
  int id;
  std::string name;
  std::function<CheckResult(const VerifyOptions&)> run;
};

/// All checks in order.
std::vector<Check> all_checks();

/// Runs the selected checks (all when `ids` is empty), printing one line per
/// check as it finishes. Exceptions become failures.
std::vector<CheckResult> run_checks(const VerifyOptions& options, const std::vector<int>& ids = {},
                                    const std::function<void(const CheckResult&)>& report = {});

}  // namespace infotraj::verify

#endif  // INFOTRAJ_VERIFY_ACCEPTANCE_HPP_
