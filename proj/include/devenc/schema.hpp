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

#pragma once

#include <array>
#include <string>
#include <string_view>

namespace devenc::schema {

enum class FeatureKind { kContinuous, kBinary, kOrdinal };

struct FeatureSpec {
  std::string_view name;
  FeatureKind kind;
};

inline constexpr std::size_t kNumFeatures = 11;

inline constexpr std::array<FeatureSpec, kNumFeatures> kFeatures = {{
    {"child_age", FeatureKind::kContinuous},
    {"gender", FeatureKind::kBinary},
    {"wealth_score", FeatureKind::kContinuous},
    {"mother_edu_level", FeatureKind::kOrdinal},
    {"urban", FeatureKind::kBinary},
    {"stunting_z", FeatureKind::kContinuous},
    {"underweight_z", FeatureKind::kContinuous},
    {"diarrhea", FeatureKind::kBinary},
    {"fever", FeatureKind::kBinary},
    {"books", FeatureKind::kOrdinal},
    {"stimulation_outing", FeatureKind::kBinary},
}};

inline constexpr std::string_view kOutcome = "ecdi_on_track";
inline constexpr std::string_view kCountry = "country_code";
inline constexpr std::string_view kRegion = "region";
inline constexpr std::string_view kQuintile = "wealth_quintile";
inline constexpr std::string_view kRowId = "row_id";

inline constexpr std::size_t kWealthIndex = 2;

std::array<std::string, kNumFeatures> feature_names();

// Index of a feature by name, or kNumFeatures when unknown.
std::size_t feature_index(std::string_view name);

}  // namespace devenc::schema
