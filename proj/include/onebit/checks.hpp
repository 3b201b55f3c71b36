// Copyright 2026 The onebit-ar Authors. All Rights Reserved.
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

namespace onebit {

struct CheckOutcome {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Quick invariant and oracle checks on small random instances: the
/// self-test behind `onebit_sim check`. Runs in well under a second.
std::vector<CheckOutcome> run_checks(std::uint64_t seed);

}  // namespace onebit
