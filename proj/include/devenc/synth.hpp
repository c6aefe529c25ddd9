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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "devenc/dataset.hpp"
#include "devenc/schema.hpp"

namespace devenc {

// Generative parameters for multi-country data with a controllable domain
// shift. Two latent factors (socioeconomic status, child health) load on the
// features and drive the outcome. Country c shifts the feature means by
// shift_scale * u_c and the factor effects by shift_scale * v_c, with u_c,
// v_c random unit directions.
struct SynthConfig {
  using FeatureArray = std::array<double, schema::kNumFeatures>;

  int n_countries = 12;
  int rows_per_country = 2000;
  FeatureArray ses_loading = default_ses_loading();
  FeatureArray health_loading = default_health_loading();
  std::array<double, 2> factor_effects = {2.5, 1.25};  // SES, health
  FeatureArray direct_effects = default_direct_effects();
  double intercept = 0.3;
  double country_shift_scale = 0.5;
  double label_noise = 0.0;
  // Optional per-quintile flip rates (Q1..Q5) applied on top of label_noise.
  std::optional<std::array<double, 5>> quintile_label_noise;
  std::uint64_t seed = 42;
  // Region per country index; empty means pairs: R1, R1, R2, R2, ...
  std::vector<std::string> regions;

  static FeatureArray default_ses_loading();
  static FeatureArray default_health_loading();
  static FeatureArray default_direct_effects();
  void validate() const;
  std::string country_code(int index) const;
  std::string region_of(int index) const;
};

// Correlation of the latent feature scores implied by the loadings.
Matrix synth_correlation(const SynthConfig& cfg);

Dataset synth_generate(const SynthConfig& cfg);

}  // namespace devenc
