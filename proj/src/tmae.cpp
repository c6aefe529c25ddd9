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

#include "devenc/tmae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "devenc/error.hpp"
#include "devenc/serialize.hpp"

namespace devenc::tmae {

void PretrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("pretrain epochs must be >= 1");
  if (batch_size < 1) throw InvalidArgument("pretrain batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidArgument("pretrain learning_rate must be > 0");
  if (!(mask_ratio > 0.0 && mask_ratio < 1.0)) throw InvalidArgument("mask_ratio must be in (0, 1)");
  if (hidden_dims.empty()) throw InvalidArgument("encoder needs at least one hidden dim");
}

int masked_count(int d, double ratio) { return static_cast<int>(std::lround(ratio * d)); }

std::vector<int> sample_mask(int d, double ratio, Rng& rng) {
  const int k = masked_count(d, ratio);
  if (k < 1 || k >= d) {
    std::ostringstream msg;
    msg << "mask ratio " << ratio << " masks " << k << " of " << d << " features; need 1.." << d - 1;
    throw InvalidArgument(msg.str());
  }
  std::vector<int> idx(static_cast<std::size_t>(d));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.below(static_cast<std::uint64_t>(d - i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

Vector apply_mask(const Vector& row, std::span<const int> masked, const Vector& mask_token) {
  if (row.size() != mask_token.size()) throw ShapeError("mask token width differs from row width");
  Vector out = row;
  for (int j : masked) {
    if (j < 0 || j >= row.size()) throw ShapeError("mask index out of range");
    out[j] = mask_token[j];
  }
  return out;
}

void EncoderCheckpoint::validate() const {
  encoder.validate();
  decoder.validate();
  const auto d = static_cast<std::size_t>(encoder.input_dim());
  if (feature_names.size() != d) throw SchemaError("checkpoint feature_names length differs from encoder input");
  if (static_cast<std::size_t>(mask_token.size()) != d) throw SchemaError("mask token length differs from encoder input");
  if (standardizer.size() != d) throw SchemaError("standardizer width differs from encoder input");
  if (decoder.input_dim() != encoder.output_dim()) throw SchemaError("decoder input differs from encoder latent width");
  if (static_cast<std::size_t>(decoder.output_dim()) != d) throw SchemaError("decoder output differs from feature count");
  if (!mask_token.allFinite()) throw SchemaError("mask token holds non-finite values");
  standardizer.validate(feature_names);
}

namespace {

std::vector<int> encoder_dims(int d, const std::vector<int>& hidden) {
  std::vector<int> dims{d};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  return dims;
}

std::vector<int> decoder_dims(int d, const std::vector<int>& hidden) {
  std::vector<int> dims(hidden.rbegin(), hidden.rend());
  dims.push_back(d);
  return dims;
}

void check_schema(const EncoderCheckpoint& ckpt, const Matrix& rows) {
  if (rows.cols() != ckpt.input_dim()) {
    std::ostringstream msg;
    msg << "schema mismatch: rows have " << rows.cols() << " features, checkpoint expects "
        << ckpt.feature_names.size();
    throw SchemaError(msg.str());
  }
}

}  // namespace

EncoderCheckpoint random_checkpoint(const Standardizer& standardizer, std::vector<std::string> feature_names,
                                    std::span<const int> hidden_dims, std::uint64_t seed) {
  const auto d = static_cast<int>(feature_names.size());
  const std::vector<int> hidden(hidden_dims.begin(), hidden_dims.end());
  EncoderCheckpoint ckpt;
  ckpt.encoder = nn::init_mlp(encoder_dims(d, hidden), derive_seed(seed, 1), nn::Activation::kReLU);
  ckpt.decoder = nn::init_mlp(decoder_dims(d, hidden), derive_seed(seed, 2), nn::Activation::kIdentity);
  ckpt.mask_token = Vector::Zero(d);
  ckpt.standardizer = standardizer;
  ckpt.feature_names = std::move(feature_names);
  ckpt.meta.seed = seed;
  ckpt.validate();
  return ckpt;
}

EncoderCheckpoint pretrain(const Matrix& features, std::span<const std::string> feature_names,
                           const PretrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  const auto d = static_cast<int>(features.cols());
  if (static_cast<std::size_t>(d) != feature_names.size()) throw SchemaError("feature name count differs from width");
  const Eigen::Index n = features.rows();
  if (n < 1) throw DataError("pretraining needs at least one row");
  if (const int k = masked_count(d, cfg.mask_ratio); k < 1 || k >= d) {
    throw InvalidArgument("mask ratio must mask between 1 and d-1 features");
  }

  const Standardizer standardizer = fit_standardizer(features, feature_names);
  const Matrix data = standardizer.transform(features);
  EncoderCheckpoint ckpt = random_checkpoint(
      standardizer, std::vector<std::string>(feature_names.begin(), feature_names.end()), cfg.hidden_dims, cfg.seed);

  const nn::AdamConfig adam{.learning_rate = cfg.learning_rate};
  nn::AdamState enc_state(ckpt.encoder, adam);
  nn::AdamState dec_state(ckpt.decoder, adam);
  nn::AdamMoments token_moments{std::vector<double>(static_cast<std::size_t>(d), 0.0),
                                std::vector<double>(static_cast<std::size_t>(d), 0.0)};
  std::uint64_t token_step = 0;

  Rng rng(derive_seed(cfg.seed, 3));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(std::span<Eigen::Index>(order));
    double epoch_loss = 0.0;
    int batch_index = 0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size, ++batch_index) {
      const Eigen::Index b = std::min<Eigen::Index>(cfg.batch_size, n - start);
      Matrix target(b, d);
      Matrix input(b, d);
      Mask mask = Mask::Constant(b, d, false);
      for (Eigen::Index i = 0; i < b; ++i) {
        target.row(i) = data.row(order[static_cast<std::size_t>(start + i)]);
        input.row(i) = target.row(i);
        for (int j : sample_mask(d, cfg.mask_ratio, rng)) {
          mask(i, j) = true;
          input(i, j) = ckpt.mask_token[j];
        }
      }
      const nn::ActivationTrace enc_trace = nn::forward(ckpt.encoder, input, 0.0, nn::Mode::kTrain, rng);
      const nn::ActivationTrace dec_trace = nn::forward(ckpt.decoder, enc_trace.output(), 0.0, nn::Mode::kTrain, rng);
      const nn::LossResult loss = nn::mse_masked_loss(dec_trace.output(), target, mask);
      if (!std::isfinite(loss.loss)) {
        std::ostringstream msg;
        msg << "non-finite reconstruction loss at epoch " << epoch << ", batch " << batch_index;
        throw NumericalError(msg.str());
      }
      const nn::GradientSet dec_grad = nn::backward(ckpt.decoder, dec_trace, loss.grad);
      const nn::GradientSet enc_grad = nn::backward(ckpt.encoder, enc_trace, dec_grad.input);
      Vector token_grad = Vector::Zero(d);
      for (Eigen::Index i = 0; i < b; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
          if (mask(i, j)) token_grad[j] += enc_grad.input(i, j);
        }
      }
      try {
        nn::adam_step(dec_state, ckpt.decoder, dec_grad);
        nn::adam_step(enc_state, ckpt.encoder, enc_grad);
      } catch (const NumericalError& e) {
        std::ostringstream msg;
        msg << e.what() << " (epoch " << epoch << ", batch " << batch_index << ")";
        throw NumericalError(msg.str());
      }
      nn::adam_update({ckpt.mask_token.data(), static_cast<std::size_t>(d)},
                      {token_grad.data(), static_cast<std::size_t>(d)}, token_moments, ++token_step, adam);
      epoch_loss += loss.loss * static_cast<double>(b);
    }
    epoch_loss /= static_cast<double>(n);
    ckpt.meta.loss_history.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }
  ckpt.meta.epochs = cfg.epochs;
  ckpt.meta.batch_size = cfg.batch_size;
  ckpt.meta.learning_rate = cfg.learning_rate;
  ckpt.meta.mask_ratio = cfg.mask_ratio;
  ckpt.meta.seed = cfg.seed;
  ckpt.meta.final_loss = ckpt.meta.loss_history.back();
  ckpt.validate();
  return ckpt;
}

Matrix embed(const EncoderCheckpoint& ckpt, const Matrix& rows) {
  check_schema(ckpt, rows);
  return nn::predict(ckpt.encoder, ckpt.standardizer.transform(rows));
}

Reconstruction reconstruct(const EncoderCheckpoint& ckpt, const Matrix& rows, const Mask& mask) {
  check_schema(ckpt, rows);
  if (mask.rows() != rows.rows() || mask.cols() != rows.cols()) throw ShapeError("mask shape differs from rows");
  if (mask.count() == 0) throw InvalidArgument("masked MSE is undefined for an empty mask");
  const Matrix target = ckpt.standardizer.transform(rows);
  Matrix input = target;
  for (Eigen::Index i = 0; i < input.rows(); ++i) {
    for (Eigen::Index j = 0; j < input.cols(); ++j) {
      if (mask(i, j)) input(i, j) = ckpt.mask_token[j];
    }
  }
  Reconstruction out;
  out.values = nn::predict(ckpt.decoder, nn::predict(ckpt.encoder, input));
  out.masked_mse = nn::mse_masked_loss(out.values, target, mask).loss;
  return out;
}

std::string checkpoint_to_json(const EncoderCheckpoint& ckpt) {
  io::json j;
  j["format_version"] = ckpt.format_version;
  j["feature_names"] = ckpt.feature_names;
  j["standardizer"] = io::to_json(ckpt.standardizer);
  j["mask_token"] = io::to_json(ckpt.mask_token);
  j["encoder"] = io::to_json(ckpt.encoder);
  j["decoder"] = io::to_json(ckpt.decoder);
  j["pretrain_meta"] = {{"epochs", ckpt.meta.epochs},
                        {"batch_size", ckpt.meta.batch_size},
                        {"learning_rate", ckpt.meta.learning_rate},
                        {"mask_ratio", ckpt.meta.mask_ratio},
                        {"seed", ckpt.meta.seed},
                        {"final_loss", ckpt.meta.final_loss},
                        {"loss_history", ckpt.meta.loss_history}};
  return io::dump(j);
}

EncoderCheckpoint checkpoint_from_json(const std::string& text) {
  io::json j;
  try {
    j = io::json::parse(text);
  } catch (const io::json::exception& e) {
    throw SchemaError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  io::expect_format(j, kCheckpointFormat);
  EncoderCheckpoint ckpt;
  try {
    ckpt.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    ckpt.standardizer = io::standardizer_from_json(j.at("standardizer"));
    ckpt.mask_token = io::vector_from_json(j.at("mask_token"));
    ckpt.encoder = io::mlp_from_json(j.at("encoder"));
    ckpt.decoder = io::mlp_from_json(j.at("decoder"));
    const auto& meta = j.at("pretrain_meta");
    ckpt.meta.epochs = meta.at("epochs").get<int>();
    ckpt.meta.batch_size = meta.at("batch_size").get<int>();
    ckpt.meta.learning_rate = meta.value("learning_rate", 0.0);
    ckpt.meta.mask_ratio = meta.at("mask_ratio").get<double>();
    ckpt.meta.seed = meta.at("seed").get<std::uint64_t>();
    ckpt.meta.final_loss = meta.at("final_loss").get<double>();
    ckpt.meta.loss_history = meta.value("loss_history", std::vector<double>{});
  } catch (const io::json::exception& e) {
    throw SchemaError(std::string("malformed checkpoint: ") + e.what());
  }
  ckpt.validate();
  return ckpt;
}

EncoderCheckpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(io::read_file(path));
}

}  // namespace devenc::tmae
