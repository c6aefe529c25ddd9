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

#include "devenc/splits.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "devenc/error.hpp"
#include "devenc/rng.hpp"

namespace devenc {

Split stratified_split(std::span<const std::string> keys, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidArgument("holdout fraction must be in [0, 1]");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < keys.size(); ++i) groups[keys[i]].push_back(i);
  Rng rng(seed);
  Split split;
  for (auto& [key, idx] : groups) {
    rng.shuffle(std::span<std::size_t>(idx));
    const auto take = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(idx.size())));
    split.test.insert(split.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
    split.train.insert(split.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Split stratified_holdout(const Dataset& data, double fraction, std::uint64_t seed) {
  return stratified_split(data.country, fraction, seed);
}

Split outcome_stratified_holdout(const Dataset& data, double fraction, std::uint64_t seed) {
  std::vector<std::string> keys;
  keys.reserve(data.rows());
  for (Eigen::Index i = 0; i < data.outcome.size(); ++i) keys.push_back(data.outcome[i] > 0.5 ? "1" : "0");
  return stratified_split(keys, fraction, seed);
}

Split country_split(const Dataset& data, std::span<const std::string> held_out) {
  const std::set<std::string> out(held_out.begin(), held_out.end());
  Split split;
  for (std::size_t i = 0; i < data.rows(); ++i) (out.contains(data.country[i]) ? split.test : split.train).push_back(i);
  if (row_id_overlap(data, split.train, split.test) != 0) {
    throw DataError("country split leaks rows: a row_id appears in both train and test");
  }
  return split;
}

std::vector<std::size_t> fewshot_sample(const Dataset& data, const std::string& country, std::size_t n,
                                        std::uint64_t seed) {
  std::vector<std::size_t> idx = data.rows_of_country(country);
  if (n > idx.size()) {
    throw InvalidArgument("requested " + std::to_string(n) + " rows but country " + country + " has " +
                          std::to_string(idx.size()));
  }
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(idx));
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::size_t row_id_overlap(const Dataset& data, std::span<const std::size_t> a, std::span<const std::size_t> b) {
  std::set<std::int64_t> ids;
  for (std::size_t i : a) ids.insert(data.row_id[i]);
  std::size_t overlap = 0;
  for (std::size_t i : b) overlap += ids.contains(data.row_id[i]) ? 1 : 0;
  return overlap;
}

}  // namespace devenc
