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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "devenc/nn.hpp"
#include "devenc/rng.hpp"
#include "devenc/standardizer.hpp"
#include "devenc/types.hpp"

namespace devenc::tmae {

inline constexpr const char* kCheckpointFormat = "devenc.encoder_checkpoint/1";

struct PretrainConfig {
  int epochs = 100;
  int batch_size = 512;
  double learning_rate = 0.001;
  double mask_ratio = 0.70;
  std::vector<int> hidden_dims = {256, 64};
  std::uint64_t seed = 42;

  void validate() const;
};

// Number of masked features per row: round(ratio * d).
int masked_count(int d, double ratio);

// Sorted, unique indices of the features masked in one row.
std::vector<int> sample_mask(int d, double ratio, Rng& rng);

// Masked coordinates take the matching mask-token coordinate.
Vector apply_mask(const Vector& row, std::span<const int> masked, const Vector& mask_token);

struct PretrainMeta {
  int epochs = 0;
  int batch_size = 0;
  double learning_rate = 0.0;
  double mask_ratio = 0.0;
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  std::vector<double> loss_history;  // mean masked MSE per epoch
};

struct EncoderCheckpoint {
  std::string format_version = kCheckpointFormat;
  nn::MlpParams encoder;  // d -> hidden... -> latent, ReLU latent
  nn::MlpParams decoder;  // latent -> hidden... -> d, identity output
  Vector mask_token;      // one learnable value per feature, standardized space
  Standardizer standardizer;
  std::vector<std::string> feature_names;
  PretrainMeta meta;

  int input_dim() const { return encoder.input_dim(); }
  int latent_dim() const { return encoder.output_dim(); }
  // Throws SchemaError/ShapeError when the pieces disagree.
  void validate() const;
};

using EpochCallback = std::function<void(int epoch, double loss)>;

// Self-supervised masked reconstruction on raw (unstandardized) features. The
// standardizer is fitted on `features` and frozen into the checkpoint. No
// labels are read.
EncoderCheckpoint pretrain(const Matrix& features, std::span<const std::string> feature_names,
                           const PretrainConfig& cfg, const EpochCallback& on_epoch = {});

// Latent representation (all features visible) of raw rows.
Matrix embed(const EncoderCheckpoint& ckpt, const Matrix& rows);

struct Reconstruction {
  Matrix values;  // decoder output, standardized space
  double masked_mse = 0.0;
};

Reconstruction reconstruct(const EncoderCheckpoint& ckpt, const Matrix& rows, const Mask& mask);

// Random checkpoint with the given architecture, for tests and baselines.
EncoderCheckpoint random_checkpoint(const Standardizer& standardizer, std::vector<std::string> feature_names,
                                    std::span<const int> hidden_dims, std::uint64_t seed);

std::string checkpoint_to_json(const EncoderCheckpoint& ckpt);
EncoderCheckpoint checkpoint_from_json(const std::string& text);
EncoderCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace devenc::tmae
