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
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "devenc/baselines.hpp"
#include "devenc/classifier.hpp"
#include "devenc/dataset.hpp"
#include "devenc/metrics.hpp"
#include "devenc/stats.hpp"
#include "devenc/tmae.hpp"

namespace devenc::eval {

using nlohmann::json;

// Maps raw feature rows to probabilities.
using Predictor = std::function<Vector(const Matrix&)>;
// Trains on a dataset with the given seed and returns a predictor.
using Trainer = std::function<Predictor(const Dataset& train, std::uint64_t seed)>;

Predictor predictor_of(const classifier::ClassifierModel& model);
Predictor predictor_of(const classifier::Ensemble& ensemble);
Predictor predictor_of(const baselines::GbdtModel& model);

// AUC of a predictor on a dataset.
double evaluate_auc(const Predictor& predict, const Dataset& data);

struct GroupValue {
  std::string group;
  std::size_t n = 0;
  double value = 0.0;
  bool defined = true;
  std::string note;
};

struct EvalReport {
  std::string metric;
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n_resamples = 0;
  std::vector<GroupValue> per_group;
  std::uint64_t seed = 0;
  json config = json::object();
  std::vector<double> resample_values;
};

json to_json(const EvalReport& report);
std::string to_text(const EvalReport& report);

// ---- bootstrap ----

// Retrains on `train` with `seed` and returns the metric on a fixed test set.
using TrainEvalClosure = std::function<double(const Dataset& train, std::uint64_t seed)>;

struct BootstrapConfig {
  int n_resamples = 1000;
  std::uint64_t seed = 42;
  int max_retries = 10;
  double level = 0.95;
  int jobs = 1;
};

// Row indices drawn with replacement within each country, keeping each
// country's size.
std::vector<std::size_t> country_stratified_resample(const Dataset& data, Rng& rng);

// Percentile CI of the closure over country-stratified resamples of `train`.
// Resamples that lose an outcome class are redrawn up to max_retries times.
// The point estimate is the closure on the full training set.
EvalReport bootstrap_ci(const TrainEvalClosure& closure, const Dataset& train, const BootstrapConfig& cfg,
                        const std::string& metric = "auc");

// ---- leave-one-country-out ----

struct LocoFold {
  std::string country;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t overlap = 0;  // shared row_ids; checked to be zero
  double auc = 0.0;
  bool defined = true;
  std::string note;
};

struct LocoResult {
  std::vector<LocoFold> folds;
  std::uint64_t seed = 0;

  double mean_auc() const;
  EvalReport report() const;
};

// Throws DataError if any fold's train and test share a row_id.
LocoResult loco_run(const Trainer& trainer, const Dataset& data, std::uint64_t seed, int jobs = 1);

// ---- few-shot curves ----

inline const std::vector<int> kFewShotSizes{50, 100, 200, 500, 1000, 2000, 5000};

struct FewShotConfig {
  std::vector<int> sizes = kFewShotSizes;
  int n_seeds = 10;
  std::uint64_t seed = 42;
  std::size_t ensemble_size = classifier::kDefaultEnsembleSize;
  classifier::FinetuneConfig finetune;
  baselines::GbdtConfig gbdt;
  int jobs = 1;
};

struct FewShotPoint {
  std::string model;
  int n = 0;
  int seed_index = 0;
  std::uint64_t seed = 0;
  double auc = 0.0;
};

struct FewShotSummary {
  std::string model;
  int n = 0;
  double mean = 0.0;
  double sd = 0.0;
};

// Pre-trained ensemble against one baseline at one sample size.
struct FewShotComparison {
  std::string baseline;
  int n = 0;
  int wins = 0;
  int seeds = 0;
  double gain = 0.0;           // mean AUC difference
  double relative_gain = 0.0;  // mean ratio - 1
  stats::TTestResult ttest;
};

struct FewShotCurve {
  std::string tune_country;
  std::vector<std::string> eval_countries;
  std::vector<int> sizes;  // sizes actually run
  std::vector<FewShotPoint> points;
  std::vector<FewShotSummary> summary;
  std::vector<FewShotComparison> comparisons;
  std::vector<std::string> warnings;

  double mean_auc(const std::string& model, int n) const;
  const FewShotComparison& comparison(const std::string& baseline, int n) const;
};

inline constexpr const char* kPretrainedModel = "pretrained";
inline constexpr const char* kColdMlpModel = "cold_mlp";
inline constexpr const char* kGbdtModel = "gbdt";

// For each size and seed, draws n rows of `tune_country`, fine-tunes the
// pre-trained ensemble and trains both cold-start baselines on the same rows,
// and scores all three on the other countries of `target_region`. Sizes larger
// than the country are skipped with a warning.
FewShotCurve fewshot_curve(const tmae::EncoderCheckpoint& ckpt, const Dataset& target_region,
                           const std::string& tune_country, const FewShotConfig& cfg);

// Columns model,n,seed,auc.
std::string curve_csv(const FewShotCurve& curve);
json to_json(const FewShotCurve& curve);

// ---- sample complexity of the frozen-encoder head ----

struct ComplexityConfig {
  std::vector<int> sizes{50, 100, 200, 400, 800};
  int n_seeds = 10;
  std::uint64_t seed = 42;
  double test_fraction = 0.5;
  classifier::FinetuneConfig finetune;  // freeze_encoder is forced on
  int jobs = 1;
};

struct ComplexityPoint {
  int n = 0;
  double mean_auc = 0.0;
  double sd_auc = 0.0;
  double deficit = 0.0;  // reference AUC - mean AUC
  std::vector<double> aucs;
};

struct ComplexityResult {
  int reference_n = 0;
  double reference_auc = 0.0;
  std::vector<ComplexityPoint> points;
  double c = 0.0;            // least-squares fit deficit ~ c / sqrt(n)
  double correlation = 0.0;  // pearson(deficit, 1 / sqrt(n))
};

// Splits `target` once into a fixed test set and a training pool; heads are
// trained on n rows drawn from the pool and the reference uses the whole pool.
ComplexityResult sample_complexity_curve(const tmae::EncoderCheckpoint& ckpt, const Dataset& target,
                                         const ComplexityConfig& cfg);

json to_json(const ComplexityResult& result);

// ---- importance, equity, calibration, divergence ----

struct ImportanceRow {
  std::string feature;
  double importance = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct ImportanceResult {
  double baseline_auc = 0.0;
  int n_repeats = 0;
  std::uint64_t seed = 0;
  std::vector<ImportanceRow> rows;  // descending importance

  const ImportanceRow& row(const std::string& feature) const;
};

// Importance of feature j = baseline AUC - mean AUC over n_repeats
// within-column shuffles; the CI is the percentile interval of the drops.
ImportanceResult permutation_importance(const Predictor& predict, const Dataset& data, int n_repeats = 100,
                                        std::uint64_t seed = 42, int jobs = 1);

json to_json(const ImportanceResult& result);
std::string to_text(const ImportanceResult& result);

struct QuintileRow {
  int quintile = 0;
  std::size_t n = 0;
  double auc = 0.0;
  bool defined = true;
  std::string note;
};

struct EquityResult {
  std::vector<QuintileRow> rows;  // Q1..Q5
  double ratio = 0.0;             // AUC(Q5) / AUC(Q1)
  bool ratio_defined = false;
};

EquityResult equity_audit(const Predictor& predict, const Dataset& data);
json to_json(const EquityResult& result);

struct CalibrationResult {
  std::size_t n = 0;
  double brier = 0.0;
  double ece = 0.0;
  std::vector<metrics::ReliabilityBin> bins;
};

CalibrationResult calibration_report(const Predictor& predict, const Dataset& data, int n_bins = 10);
json to_json(const CalibrationResult& result);

struct DivergenceResult {
  double d_hat = 0.0;
  double accuracy = 0.0;
  std::size_t n_per_domain = 0;
};

// Proxy A-distance: the larger domain is subsampled to the size of the
// smaller, each domain is split in half, a logistic domain classifier is fit
// on one half and d_hat = clip(2 (2 acc - 1), 0, 2) from the other.
DivergenceResult proxy_divergence(const Matrix& source, const Matrix& target, std::uint64_t seed);
json to_json(const DivergenceResult& result);

}  // namespace devenc::eval
