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

#include "devenc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "devenc/error.hpp"

namespace devenc {

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.feature_names = feature_names;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
  out.outcome.resize(static_cast<Eigen::Index>(indices.size()));
  out.country.reserve(indices.size());
  out.region.reserve(indices.size());
  out.wealth_quintile.reserve(indices.size());
  out.row_id.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    if (i >= rows()) throw InvalidArgument("subset index out of range");
    const auto r = static_cast<Eigen::Index>(k);
    out.features.row(r) = features.row(static_cast<Eigen::Index>(i));
    out.outcome[r] = outcome[static_cast<Eigen::Index>(i)];
    out.country.push_back(country[i]);
    out.region.push_back(region[i]);
    out.wealth_quintile.push_back(wealth_quintile[i]);
    out.row_id.push_back(row_id[i]);
  }
  return out;
}

std::vector<std::string> Dataset::countries() const {
  std::set<std::string> unique(country.begin(), country.end());
  return {unique.begin(), unique.end()};
}

std::vector<std::size_t> Dataset::rows_of_country(const std::string& code) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows(); ++i) {
    if (country[i] == code) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> Dataset::rows_of_countries(std::span<const std::string> codes) const {
  std::set<std::string> wanted(codes.begin(), codes.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows(); ++i) {
    if (wanted.contains(country[i])) out.push_back(i);
  }
  return out;
}

bool Dataset::has_both_classes() const {
  bool pos = false;
  bool neg = false;
  for (Eigen::Index i = 0; i < outcome.size(); ++i) {
    (outcome[i] > 0.5 ? pos : neg) = true;
  }
  return pos && neg;
}

double Dataset::prevalence() const {
  return outcome.size() == 0 ? 0.0 : outcome.mean();
}

void Dataset::validate() const {
  const std::size_t n = rows();
  if (static_cast<std::size_t>(outcome.size()) != n || country.size() != n || region.size() != n ||
      wealth_quintile.size() != n || row_id.size() != n) {
    throw DataError("dataset columns have inconsistent lengths");
  }
  if (feature_names.size() != cols()) throw DataError("feature name count does not match matrix width");
  if (!features.allFinite()) throw DataError("dataset features contain NaN or infinite values");
  for (std::size_t i = 0; i < n; ++i) {
    const double y = outcome[static_cast<Eigen::Index>(i)];
    if (y != 0.0 && y != 1.0) throw DataError("outcome must be binary (row " + std::to_string(i) + ")");
    if (country[i].empty() || region[i].empty()) {
      throw DataError("empty country or region label (row " + std::to_string(i) + ")");
    }
    if (wealth_quintile[i] < 1 || wealth_quintile[i] > 5) throw DataError("wealth quintile outside 1..5");
  }
}

Dataset concat(std::span<const Dataset> parts) {
  Dataset out;
  if (parts.empty()) return out;
  out.feature_names = parts.front().feature_names;
  std::size_t n = 0;
  for (const auto& p : parts) {
    if (p.feature_names != out.feature_names) throw SchemaError("cannot concatenate datasets with different schemas");
    n += p.rows();
  }
  out.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out.feature_names.size()));
  out.outcome.resize(static_cast<Eigen::Index>(n));
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    const auto m = static_cast<Eigen::Index>(p.rows());
    out.features.middleRows(at, m) = p.features;
    out.outcome.segment(at, m) = p.outcome;
    out.country.insert(out.country.end(), p.country.begin(), p.country.end());
    out.region.insert(out.region.end(), p.region.begin(), p.region.end());
    out.wealth_quintile.insert(out.wealth_quintile.end(), p.wealth_quintile.begin(), p.wealth_quintile.end());
    out.row_id.insert(out.row_id.end(), p.row_id.begin(), p.row_id.end());
    at += m;
  }
  return out;
}

std::vector<int> wealth_quintiles(const Matrix& features, std::span<const std::string> country,
                                  std::size_t wealth_column) {
  const auto n = static_cast<std::size_t>(features.rows());
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[country[i]].push_back(i);
  std::vector<int> quintile(n, 0);
  const auto col = static_cast<Eigen::Index>(wealth_column);
  for (auto& [code, idx] : groups) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return features(static_cast<Eigen::Index>(a), col) < features(static_cast<Eigen::Index>(b), col);
    });
    const std::size_t m = idx.size();
    for (std::size_t rank = 0; rank < m; ++rank) {
      quintile[idx[rank]] = static_cast<int>((5 * rank) / m) + 1;
    }
  }
  return quintile;
}

}  // namespace devenc
