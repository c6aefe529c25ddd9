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

#include <json.hpp>

#include "devenc/classifier.hpp"
#include "devenc/dataset.hpp"
#include "devenc/standardizer.hpp"
#include "devenc/types.hpp"

namespace devenc::baselines {

// ---- gradient-boosted trees ----

inline constexpr const char* kGbdtFormat = "devenc.gbdt/1";

struct GbdtConfig {
  int n_estimators = 100;
  int max_depth = 6;
  double learning_rate = 0.1;
  int min_samples_leaf = 20;
  int n_bins = 64;
  int early_stopping_rounds = 10;
  double lambda_l2 = 0.0;
  std::uint64_t seed = 42;

  void validate() const;
};

nlohmann::json to_json(const GbdtConfig& cfg);
GbdtConfig gbdt_config_from_json(const nlohmann::json& j, GbdtConfig base = {});

struct TreeNode {
  int feature = -1;    // -1 marks a leaf
  int threshold = -1;  // bin index; bin <= threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output in log-odds (before shrinkage)
  int count = 0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  int depth() const;
  double predict(std::span<const std::uint16_t> bins) const;
};

struct GbdtModel {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> bin_edges;  // per feature, ascending
  double base_score = 0.0;                     // prior log-odds
  double learning_rate = 0.1;
  std::vector<Tree> trees;
  std::vector<double> train_loss;  // mean logistic loss after each round
  int best_iteration = 0;
  bool constant = false;
  std::vector<std::string> warnings;
  GbdtConfig config;
};

// Cut points for one column: midpoints between consecutive distinct values
// when they fit in n_bins, otherwise midpoints at evenly spaced quantiles.
std::vector<double> compute_bin_edges(std::span<const double> column, int n_bins);

// Number of edges strictly below `value`.
std::uint16_t bin_of(double value, std::span<const double> edges);

struct SplitCandidate {
  int feature = -1;
  int threshold = -1;
  double gain = 0.0;

  bool valid() const { return feature >= 0; }
};

// Second-order gain of splitting the node into left and right children.
double split_gain(double g_left, double h_left, double g_right, double h_right, double lambda_l2);

// Best histogram split over `rows` of a column-major binned matrix.
// Candidates leaving fewer than min_samples_leaf rows on either side are
// skipped.
SplitCandidate best_split(const std::vector<std::vector<std::uint16_t>>& binned, std::span<const std::size_t> rows,
                          std::span<const double> grad, std::span<const double> hess,
                          std::span<const int> bins_per_feature, int min_samples_leaf, double lambda_l2);

// Early stopping on val AUC runs only when `val` is given and has both classes.
GbdtModel train_gbdt(const Dataset& train, const Dataset* val, const GbdtConfig& cfg);
// Holds out an outcome-stratified `val_fraction` for early stopping.
GbdtModel train_gbdt_with_holdout(const Dataset& sample, const GbdtConfig& cfg, double val_fraction = 0.2);

Vector gbdt_raw_score(const GbdtModel& model, const Matrix& rows);
Vector predict_gbdt(const GbdtModel& model, const Matrix& rows);

nlohmann::json gbdt_to_json(const GbdtModel& model);
GbdtModel gbdt_from_json(const nlohmann::json& j);

// ---- logistic regression ----

struct LogregConfig {
  double l2 = 0.01;
  int max_iterations = 10000;
  double tolerance = 1e-6;  // on the gradient norm
};

struct LogisticModel {
  Vector weights;
  double bias = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

struct LogisticObjective {
  double value = 0.0;
  Vector grad_weights;
  double grad_bias = 0.0;
};

// Mean log-loss + (l2 / 2) * |w|^2; the bias is not penalised.
LogisticObjective logistic_objective(const Matrix& x, const Vector& y, const Vector& w, double b, double l2);

// Full-batch gradient descent with Armijo backtracking.
LogisticModel fit_logistic(const Matrix& x, const Vector& y, const LogregConfig& cfg);
Vector predict_logistic(const LogisticModel& model, const Matrix& x);

struct LogregClassifier {
  Standardizer standardizer;
  LogisticModel model;
};

LogregClassifier train_logreg(const Dataset& train, const LogregConfig& cfg);
Vector predict_proba(const LogregClassifier& clf, const Matrix& rows);

// ---- cold-start MLP ----

inline const std::vector<int> kColdMlpHidden{512, 32};

classifier::ClassifierModel train_cold_mlp(const Dataset& train, const Dataset& val,
                                           const classifier::FinetuneConfig& cfg);
classifier::ClassifierModel train_cold_mlp(const Dataset& sample, const classifier::FinetuneConfig& cfg);

}  // namespace devenc::baselines
