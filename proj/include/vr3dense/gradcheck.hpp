// Copyright 2026 The VR3Dense Authors
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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vr3dense {

struct GradCheckRow {
  std::string name;
  int trials = 0;
  double max_rel_error = 0.0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GradCheckRow> rows;
  double tolerance = 0.0;
  bool all_passed = false;
};

/// Checks every analytic loss gradient against the central finite-difference
/// oracle on randomized fixtures. Fixtures are resampled until they keep a
/// safe margin from the non-smooth loci (absolute-value sign flips, integer
/// sampling lattice, clamp boundaries), where the comparison is undefined.
GradCheckReport run_gradient_certification(std::uint64_t seed, int trials = 50,
                                           double tolerance = 1e-4);

/// Fixed-width text table with one row per certified loss.
std::string format_gradcheck_table(const GradCheckReport& report);

}  // namespace vr3dense
