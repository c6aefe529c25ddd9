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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "devenc/types.hpp"

namespace devenc {

// Feature matrix + binary outcome + group labels. Every training and
// evaluation routine consumes this.
struct Dataset {
  std::vector<std::string> feature_names;
  Matrix features;  // n x d, imputed (no NaN)
  Vector outcome;   // 0/1
  std::vector<std::string> country;
  std::vector<std::string> region;
  std::vector<int> wealth_quintile;  // 1..5
  std::vector<std::int64_t> row_id;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }

  Dataset subset(std::span<const std::size_t> indices) const;
  // Sorted unique country codes.
  std::vector<std::string> countries() const;
  std::vector<std::size_t> rows_of_country(const std::string& code) const;
  std::vector<std::size_t> rows_of_countries(std::span<const std::string> codes) const;
  bool has_both_classes() const;
  double prevalence() const;

  // Throws DataError when columns disagree in length, a value is NaN, the
  // outcome is non-binary, or a group label is empty.
  void validate() const;
};

// Concatenates datasets with identical feature schemas.
Dataset concat(std::span<const Dataset> parts);

// Per-country quintiles of wealth_score: rows sorted by wealth (ties by
// position) and cut into five bins whose sizes differ by at most one.
std::vector<int> wealth_quintiles(const Matrix& features, std::span<const std::string> country,
                                  std::size_t wealth_column);

}  // namespace devenc
