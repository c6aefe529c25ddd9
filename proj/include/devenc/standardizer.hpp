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

#include <span>
#include <string>
#include <vector>

#include "devenc/types.hpp"

namespace devenc {

// Per-feature z-scoring with population standard deviation.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> std;

  std::size_t size() const { return mean.size(); }
  Matrix transform(const Matrix& x) const;
  Matrix inverse_transform(const Matrix& z) const;
  // Throws SchemaError naming the first feature whose std is not > 0.
  void validate(std::span<const std::string> names) const;
};

inline constexpr double kMinStd = 1e-12;

enum class ZeroVariance {
  kError,      // throw SchemaError naming the feature
  kUnitScale,  // keep the column centred, scale 1 (small local samples)
};

Standardizer fit_standardizer(const Matrix& x, std::span<const std::string> names,
                              ZeroVariance policy = ZeroVariance::kError);

}  // namespace devenc
