// Copyright 2026 The devenc Authors.
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

#include "devenc/schema.hpp"

namespace devenc::schema {

std::array<std::string, kNumFeatures> feature_names() {
  std::array<std::string, kNumFeatures> names;
  for (std::size_t i = 0; i < kNumFeatures; ++i) names[i] = std::string(kFeatures[i].name);
  return names;
}

std::size_t feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    if (kFeatures[i].name == name) return i;
  }
  return kNumFeatures;
}

}  // namespace devenc::schema
