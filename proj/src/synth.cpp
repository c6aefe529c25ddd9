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

#include "devenc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "devenc/error.hpp"
#include "devenc/rng.hpp"

namespace devenc {

namespace {

Vector unit_direction(Rng& rng, Eigen::Index d) {
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.normal();
  const double norm = v.norm();
  return norm > 0.0 ? Vector(v / norm) : v;
}

int ordinal(double z, std::initializer_list<double> cuts) {
  int level = 0;
  for (double c : cuts) {
    if (z >= c) ++level;
  }
  return level;
}

double round_to(double v, double step) { return std::round(v / step) * step; }

}  // namespace

// Feature order: child_age, gender, wealth, edu, urban, stunting,
// underweight, diarrhea, fever, books, stimulation_outing.
SynthConfig::FeatureArray SynthConfig::default_ses_loading() {
  return {0.0, 0.0, 0.85, 0.75, 0.65, 0.4, 0.35, 0.0, 0.0, 0.75, 0.6};
}

SynthConfig::FeatureArray SynthConfig::default_health_loading() {
  return {0.0, 0.0, 0.0, 0.0, 0.0, 0.7, 0.75, -0.5, -0.45, 0.0, 0.0};
}

SynthConfig::FeatureArray SynthConfig::default_direct_effects() {
  return {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
}

void SynthConfig::validate() const {
  if (n_countries < 1) throw InvalidArgument("n_countries must be >= 1");
  if (rows_per_country < 100) throw InvalidArgument("rows_per_country must be >= 100");
  if (country_shift_scale < 0.0) throw InvalidArgument("country_shift_scale must be >= 0");
  if (label_noise < 0.0 || label_noise > 1.0) throw InvalidArgument("label_noise must be in [0, 1]");
  if (quintile_label_noise) {
    for (double q : *quintile_label_noise) {
      if (q < 0.0 || q > 1.0) throw InvalidArgument("quintile_label_noise entries must be in [0, 1]");
    }
  }
  for (std::size_t j = 0; j < schema::kNumFeatures; ++j) {
    if (ses_loading[j] * ses_loading[j] + health_loading[j] * health_loading[j] > 1.0) {
      throw InvalidArgument("loadings of feature " + std::string(schema::kFeatures[j].name) + " exceed unit variance");
    }
  }
  if (!regions.empty() && regions.size() != static_cast<std::size_t>(n_countries)) {
    throw InvalidArgument("regions must list one region per country");
  }
}

std::string SynthConfig::country_code(int index) const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "C%02d", index + 1);
  return buf;
}

std::string SynthConfig::region_of(int index) const {
  if (!regions.empty()) return regions[static_cast<std::size_t>(index)];
  return "R" + std::to_string(index / 2 + 1);
}

Matrix synth_correlation(const SynthConfig& cfg) {
  const auto d = static_cast<Eigen::Index>(schema::kNumFeatures);
  Matrix r(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      r(i, j) = i == j ? 1.0
                       : cfg.ses_loading[i] * cfg.ses_loading[j] + cfg.health_loading[i] * cfg.health_loading[j];
    }
  }
  return r;
}

Dataset synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  const auto d = static_cast<Eigen::Index>(schema::kNumFeatures);
  Vector unique_sd(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double l2 = cfg.ses_loading[j] * cfg.ses_loading[j] + cfg.health_loading[j] * cfg.health_loading[j];
    unique_sd[j] = std::sqrt(1.0 - l2);
  }

  std::vector<Dataset> parts;
  for (int c = 0; c < cfg.n_countries; ++c) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(c)));
    const Vector mu = cfg.country_shift_scale * unit_direction(rng, d);
    const Vector effect_shift = cfg.country_shift_scale * unit_direction(rng, 2);
    const double ses_effect = cfg.factor_effects[0] + effect_shift[0];
    const double health_effect = cfg.factor_effects[1] + effect_shift[1];
    const double bias = cfg.intercept + 0.5 * cfg.country_shift_scale * rng.normal();

    const auto n = static_cast<Eigen::Index>(cfg.rows_per_country);
    Dataset part;
    for (const auto& f : schema::kFeatures) part.feature_names.emplace_back(f.name);
    part.features.resize(n, d);
    part.outcome.resize(n);
    Vector z(d);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ses = rng.normal();
      const double health = rng.normal();
      for (Eigen::Index j = 0; j < d; ++j) {
        z[j] = mu[j] + cfg.ses_loading[j] * ses + cfg.health_loading[j] * health + unique_sd[j] * rng.normal();
      }
      auto x = part.features.row(i);
      x[0] = std::clamp(std::round(41.5 + 10.1 * z[0]), 24.0, 59.0);
      x[1] = z[1] > 0.0 ? 1.0 : 0.0;
      x[2] = round_to(z[2], 1e-5);
      x[3] = ordinal(z[3], {-0.6, 0.3, 1.2});
      x[4] = z[4] > 0.4 ? 1.0 : 0.0;
      x[5] = std::clamp(round_to(-1.2 + 1.3 * z[5], 0.01), -6.0, 6.0);
      x[6] = std::clamp(round_to(-0.9 + 1.1 * z[6], 0.01), -6.0, 6.0);
      x[7] = z[7] > 1.0 ? 1.0 : 0.0;
      x[8] = z[8] > 0.8 ? 1.0 : 0.0;
      x[9] = ordinal(z[9], {0.0, 0.7, 1.3});
      x[10] = z[10] > -0.3 ? 1.0 : 0.0;
      double logit = bias + ses_effect * ses + health_effect * health;
      for (Eigen::Index j = 0; j < d; ++j) logit += cfg.direct_effects[j] * (z[j] - mu[j]);
      const double p = 1.0 / (1.0 + std::exp(-logit));
      double y = rng.uniform() < p ? 1.0 : 0.0;
      if (rng.uniform() < cfg.label_noise) y = 1.0 - y;
      part.outcome[i] = y;
      part.country.push_back(cfg.country_code(c));
      part.region.push_back(cfg.region_of(c));
      part.row_id.push_back(static_cast<std::int64_t>(c) * cfg.rows_per_country + i);
    }
    part.wealth_quintile = wealth_quintiles(part.features, part.country, schema::kWealthIndex);
    if (cfg.quintile_label_noise) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double rate = (*cfg.quintile_label_noise)[static_cast<std::size_t>(part.wealth_quintile[i] - 1)];
        if (rng.uniform() < rate) part.outcome[i] = 1.0 - part.outcome[i];
      }
    }
    parts.push_back(std::move(part));
  }
  Dataset out = concat(parts);
  out.validate();
  return out;
}

}  // namespace devenc
