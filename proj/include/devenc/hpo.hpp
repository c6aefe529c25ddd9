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
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "devenc/dataset.hpp"
#include "devenc/rng.hpp"

namespace devenc::hpo {

// Encoder and fine-tuning hyperparameters; defaults are the reference optimum.
struct TrainConfig {
  double learning_rate = 0.00115;
  double l2 = 0.00143;
  int hidden1 = 256;
  int hidden2 = 64;
  double dropout = 0.15;
  int batch_size = 512;
  double mask_ratio = 0.7;
};

nlohmann::json to_json(const TrainConfig& cfg);

struct SearchSpace {
  double learning_rate_min = 1e-4, learning_rate_max = 1e-2;  // log-uniform
  double l2_min = 1e-5, l2_max = 1e-2;                        // log-uniform
  int hidden1_min = 64, hidden1_max = 512;
  int hidden2_min = 16, hidden2_max = 128;  // also kept below hidden1
  double dropout_min = 0.0, dropout_max = 0.5;
  int batch_size_min = 64, batch_size_max = 512;
  double mask_ratio_min = 0.3, mask_ratio_max = 0.8;

  void validate() const;
  TrainConfig sample(Rng& rng) const;
  bool contains(const TrainConfig& cfg) const;
};

nlohmann::json to_json(const SearchSpace& space);
SearchSpace search_space_from_json(const nlohmann::json& j, SearchSpace base = {});

// mean + 2 * min of the per-country AUCs.
double fairness_objective(const std::map<std::string, double>& per_country_auc);

struct TrialRecord {
  int index = 0;
  TrainConfig config;
  std::map<std::string, double> per_country_auc;
  double mean_auc = 0.0;
  double min_auc = 0.0;
  double objective = 0.0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;  // kept out of the CSV log so logs stay reproducible
  bool ok = true;
  std::string error;
};

struct SearchConfig {
  int trials = 20;
  std::uint64_t seed = 42;
  int pretrain_epochs = 20;
  int finetune_max_epochs = 200;
  int jobs = 1;
};

struct SearchResult {
  TrialRecord best;
  std::vector<TrialRecord> log;
};

// Each trial pre-trains on the features of `search_countries`, fine-tunes on
// their labels and scores AUC on every validation country. Trials with a
// numerical failure are logged as failed and the search continues.
SearchResult run_search(const SearchSpace& space, const Dataset& data, const std::vector<std::string>& search_countries,
                        const std::vector<std::string>& validation_countries, const SearchConfig& cfg);

// trial_index, config fields, mean_auc, min_auc, objective, status
std::string log_csv(const SearchResult& result);
nlohmann::json to_json(const TrialRecord& trial);

}  // namespace devenc::hpo
