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

#include <string>
#include <vector>

#include "devenc/dataset.hpp"
#include "devenc/rng.hpp"

namespace devenc::testing {

// Single-country dataset around a feature matrix and labels.
inline Dataset make_dataset(const Matrix& x, const Vector& y, const std::string& country = "A") {
  Dataset d;
  for (Eigen::Index j = 0; j < x.cols(); ++j) d.feature_names.push_back("f" + std::to_string(j));
  d.features = x;
  d.outcome = y;
  const auto n = static_cast<std::size_t>(x.rows());
  d.country.assign(n, country);
  d.region.assign(n, "R1");
  d.wealth_quintile.resize(n);
  d.row_id.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.wealth_quintile[i] = static_cast<int>(i % 5) + 1;
    d.row_id[i] = static_cast<std::int64_t>(i);
  }
  return d;
}

inline Matrix gaussian(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

}  // namespace devenc::testing
