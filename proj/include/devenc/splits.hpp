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

#include "devenc/dataset.hpp"

namespace devenc {

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Holds out round(fraction * n_g) rows of every group, where groups come from
// `keys`. Indices are returned sorted.
Split stratified_split(std::span<const std::string> keys, double fraction, std::uint64_t seed);

// Country-stratified holdout.
Split stratified_holdout(const Dataset& data, double fraction, std::uint64_t seed);

// Outcome-stratified holdout; used for early-stopping validation sets.
Split outcome_stratified_holdout(const Dataset& data, double fraction, std::uint64_t seed);

// Train = every row outside `held_out`; verified disjoint by row_id.
Split country_split(const Dataset& data, std::span<const std::string> held_out);

// n rows of `country` drawn without replacement.
std::vector<std::size_t> fewshot_sample(const Dataset& data, const std::string& country, std::size_t n,
                                        std::uint64_t seed);

// Number of row_ids present in both index sets.
std::size_t row_id_overlap(const Dataset& data, std::span<const std::size_t> a, std::span<const std::size_t> b);

}  // namespace devenc
