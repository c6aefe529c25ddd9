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

#include "devenc/standardizer.hpp"

#include <cmath>

#include "devenc/error.hpp"

namespace devenc {

Matrix Standardizer::transform(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != size()) throw ShapeError("standardizer width mismatch");
  Matrix z(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    z.col(j) = (x.col(j).array() - mean[k]) / std[k];
  }
  return z;
}

Matrix Standardizer::inverse_transform(const Matrix& z) const {
  if (static_cast<std::size_t>(z.cols()) != size()) throw ShapeError("standardizer width mismatch");
  Matrix x(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    x.col(j) = z.col(j).array() * std[k] + mean[k];
  }
  return x;
}

void Standardizer::validate(std::span<const std::string> names) const {
  if (mean.size() != std.size()) throw SchemaError("standardizer mean/std lengths differ");
  if (!names.empty() && names.size() != size()) throw SchemaError("standardizer width does not match feature names");
  for (std::size_t j = 0; j < size(); ++j) {
    if (!(std[j] > 0.0) || !std::isfinite(std[j]) || !std::isfinite(mean[j])) {
      const std::string name = names.empty() ? "#" + std::to_string(j) : names[j];
      throw SchemaError("zero-variance feature in standardizer: " + name);
    }
  }
}

Standardizer fit_standardizer(const Matrix& x, std::span<const std::string> names, ZeroVariance policy) {
  if (x.rows() == 0) throw DataError("cannot fit a standardizer on zero rows");
  Standardizer s;
  const auto n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double m = x.col(j).mean();
    const double var = (x.col(j).array() - m).square().sum() / n;
    double sd = std::sqrt(var);
    if (!(sd > kMinStd)) {
      if (policy == ZeroVariance::kError) {
        const auto k = static_cast<std::size_t>(j);
        const std::string name = k < names.size() ? names[k] : "#" + std::to_string(k);
        throw SchemaError("zero-variance feature: " + name);
      }
      sd = 1.0;
    }
    s.mean.push_back(m);
    s.std.push_back(sd);
  }
  return s;
}

}  // namespace devenc
