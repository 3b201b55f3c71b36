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

#include <string>

#include "json.hpp"
#include "onebit/harness.hpp"

namespace onebit {

/// Overlays the keys present in `j` onto `cfg`. Keys mirror the
/// ExperimentConfig field names; AR knobs live under "ar" and BIHT knobs
/// under "biht". Unknown keys are rejected.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& j);

nlohmann::json to_json(const ExperimentConfig& cfg);

/// Reads a JSON config file. A "preset" key, if present, is applied first.
ExperimentConfig load_config(const std::string& path);

}  // namespace onebit
