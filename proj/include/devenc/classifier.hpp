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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "devenc/dataset.hpp"
#include "devenc/nn.hpp"
#include "devenc/standardizer.hpp"
#include "devenc/tmae.hpp"

namespace devenc::classifier {

inline constexpr const char* kModelFormat = "devenc.classifier/1";
inline constexpr const char* kEnsembleFormat = "devenc.ensemble/1";

struct FinetuneConfig {
  double learning_rate = 0.00115;
  double l2 = 0.00143;
  double dropout = 0.15;
  int patience = 10;
  int max_epochs = 200;
  int batch_size = 512;
  std::uint64_t seed = 42;
  bool freeze_encoder = false;
  // Share of the sample held out for early stopping when no validation set is given.
  double val_fraction = 0.2;

  void validate() const;
};

nlohmann::json to_json(const FinetuneConfig& cfg);
FinetuneConfig finetune_config_from_json(const nlohmann::json& j, FinetuneConfig base = {});

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_auc = 0.0;
};

struct Provenance {
  std::string kind;  // "pretrained" or "cold_start"
  std::string checkpoint_id;
  std::uint64_t seed = 0;
  FinetuneConfig config;
};

// Feature extractor layers followed by a single linear unit; the sigmoid is
// applied at prediction time.
struct ClassifierModel {
  nn::MlpParams network;
  std::size_t encoder_layers = 0;  // leading layers that came from the encoder
  Standardizer standardizer;
  std::vector<std::string> feature_names;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  Provenance provenance;

  std::size_t trainable_parameter_count(bool freeze_encoder) const;
};

// Tracks the best validation metric; a strictly larger value counts as an
// improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience);

  // Records the metric of the next epoch; returns true when it improved.
  bool observe(double metric);
  bool should_stop() const { return since_best_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best() const { return best_; }
  int epochs() const { return epoch_; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  int since_best_ = 0;
  double best_ = -1.0;
};

ClassifierModel init_from_encoder(const tmae::EncoderCheckpoint& ckpt, const FinetuneConfig& cfg);

// Random-initialised network [d, hidden..., 1] with a standardizer fitted on
// `train` (constant columns keep unit scale).
ClassifierModel init_cold_start(const Dataset& train, std::span<const int> hidden_dims, const FinetuneConfig& cfg);

// Trains with early stopping on validation AUC and restores the best epoch's
// weights. Throws UndefinedMetric when `val` holds a single class.
ClassifierModel finetune(ClassifierModel model, const Dataset& train, const Dataset& val, const FinetuneConfig& cfg);

// As above, holding out an outcome-stratified val_fraction of `sample`.
ClassifierModel finetune(ClassifierModel model, const Dataset& sample, const FinetuneConfig& cfg);

Vector predict_proba(const ClassifierModel& model, const Matrix& rows);

struct Ensemble {
  std::vector<ClassifierModel> members;
  std::vector<std::uint64_t> seeds;
};

inline constexpr std::size_t kDefaultEnsembleSize = 5;

std::vector<std::uint64_t> default_ensemble_seeds(std::uint64_t master, std::size_t count = kDefaultEnsembleSize);

// Members are fine-tuned independently with cfg.seed replaced by each seed.
Ensemble train_ensemble(const tmae::EncoderCheckpoint& ckpt, const Dataset& train, const Dataset& val,
                        const FinetuneConfig& cfg, std::span<const std::uint64_t> seeds, int jobs = 1,
                        bool allow_duplicate_seeds = false);

// Arithmetic mean of member probabilities.
Vector predict_proba(const Ensemble& ensemble, const Matrix& rows);

nlohmann::json model_to_json(const ClassifierModel& model);
ClassifierModel model_from_json(const nlohmann::json& j);
nlohmann::json ensemble_to_json(const Ensemble& ensemble);
Ensemble ensemble_from_json(const nlohmann::json& j);

// Stable identifier of a checkpoint (FNV-1a of its JSON text).
std::string checkpoint_id(const tmae::EncoderCheckpoint& ckpt);

}  // namespace devenc::classifier
