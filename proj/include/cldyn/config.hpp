// Copyright 2026 The cldyn Authors.
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

// Experiment configuration files.
//
// A config is a YAML document with an optional `preset` base and two
// sections, `data` and `train`, whose keys override the base:
//
//   preset: figure1
//   mode: multi
//   data:
//     n: 50
//     mu: {0: 5.0}        # sparse {index: value}, or a dense list
//   train:
//     epochs: 400
//     negatives: all      # or a count
//
// Unknown keys are rejected.

#ifndef CLDYN_CONFIG_HPP_
#define CLDYN_CONFIG_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "cldyn/trainer.hpp"
#include "json.hpp"

namespace cldyn {

struct LoadedConfig {
  TrainConfig config;
  std::string preset;  // empty if the file has no base preset
  bool mode_set = false;
};

LoadedConfig ParseConfig(std::string_view yaml_text);
LoadedConfig LoadConfig(const std::filesystem::path& path);

// Seed-free canonical form: key order is fixed and vectors are written as
// sorted sparse entries, so equal configs give equal text.
nlohmann::ordered_json CanonicalJson(const TrainConfig& cfg);

// Hex SHA-256 of the canonical JSON.
std::string ConfigHash(const TrainConfig& cfg);

}  // namespace cldyn

#endif  // CLDYN_CONFIG_HPP_
