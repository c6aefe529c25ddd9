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

#include "devenc/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "devenc/error.hpp"
#include "devenc/metrics.hpp"
#include "devenc/parallel.hpp"
#include "devenc/serialize.hpp"
#include "devenc/splits.hpp"

namespace devenc::classifier {

using nlohmann::json;

void FinetuneConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
  if (l2 < 0.0) throw InvalidArgument("l2 must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("dropout must be in [0, 1)");
  if (patience < 1) throw InvalidArgument("patience must be >= 1");
  if (max_epochs < 1) throw InvalidArgument("max_epochs must be >= 1");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw InvalidArgument("val_fraction must be in (0, 1)");
}

json to_json(const FinetuneConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate}, {"l2", cfg.l2},
          {"dropout", cfg.dropout},             {"patience", cfg.patience},
          {"max_epochs", cfg.max_epochs},       {"batch_size", cfg.batch_size},
          {"seed", cfg.seed},                   {"freeze_encoder", cfg.freeze_encoder},
          {"val_fraction", cfg.val_fraction}};
}

FinetuneConfig finetune_config_from_json(const json& j, FinetuneConfig base) {
  base.learning_rate = j.value("learning_rate", base.learning_rate);
  base.l2 = j.value("l2", base.l2);
  base.dropout = j.value("dropout", base.dropout);
  base.patience = j.value("patience", base.patience);
  base.max_epochs = j.value("max_epochs", base.max_epochs);
  base.batch_size = j.value("batch_size", base.batch_size);
  base.seed = j.value("seed", base.seed);
  base.freeze_encoder = j.value("freeze_encoder", base.freeze_encoder);
  base.val_fraction = j.value("val_fraction", base.val_fraction);
  return base;
}

std::size_t ClassifierModel::trainable_parameter_count(bool freeze_encoder) const {
  std::size_t total = 0;
  for (std::size_t l = freeze_encoder ? encoder_layers : 0; l < network.num_layers(); ++l) {
    total += static_cast<std::size_t>(network.weights[l].size() + network.biases[l].size());
  }
  return total;
}

EarlyStopping::EarlyStopping(int patience) : patience_(patience) {
  if (patience < 1) throw InvalidArgument("patience must be >= 1");
}

bool EarlyStopping::observe(double metric) {
  ++epoch_;
  if (epoch_ == 1 || metric > best_) {
    best_ = metric;
    best_epoch_ = epoch_;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

std::string checkpoint_id(const tmae::EncoderCheckpoint& ckpt) {
  const std::string text = tmae::checkpoint_to_json(ckpt);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ClassifierModel init_from_encoder(const tmae::EncoderCheckpoint& ckpt, const FinetuneConfig& cfg) {
  ckpt.validate();
  cfg.validate();
  ClassifierModel model;
  const std::vector<int> head_dims{ckpt.latent_dim(), 1};
  const nn::MlpParams head = nn::init_mlp(head_dims, derive_seed(cfg.seed, 11));
  model.network.layer_dims = ckpt.encoder.layer_dims;
  model.network.layer_dims.push_back(1);
  model.network.weights = ckpt.encoder.weights;
  model.network.biases = ckpt.encoder.biases;
  model.network.weights.push_back(head.weights[0]);
  model.network.biases.push_back(head.biases[0]);
  model.network.output_activation = nn::Activation::kIdentity;
  model.encoder_layers = ckpt.encoder.num_layers();
  model.standardizer = ckpt.standardizer;
  model.feature_names = ckpt.feature_names;
  model.provenance = {"pretrained", checkpoint_id(ckpt), cfg.seed, cfg};
  return model;
}

ClassifierModel init_cold_start(const Dataset& train, std::span<const int> hidden_dims, const FinetuneConfig& cfg) {
  cfg.validate();
  std::vector<int> dims{static_cast<int>(train.cols())};
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(1);
  ClassifierModel model;
  model.network = nn::init_mlp(dims, derive_seed(cfg.seed, 13));
  model.encoder_layers = 0;
  model.standardizer = fit_standardizer(train.features, train.feature_names, ZeroVariance::kUnitScale);
  model.feature_names = train.feature_names;
  model.provenance = {"cold_start", "", cfg.seed, cfg};
  return model;
}

namespace {

void check_schema(const ClassifierModel& model, const Matrix& rows) {
  if (rows.cols() != model.network.input_dim()) {
    throw SchemaError("schema mismatch: rows have " + std::to_string(rows.cols()) + " features, model expects " +
                      std::to_string(model.network.input_dim()));
  }
}

void check_feature_names(const ClassifierModel& model, const Dataset& data) {
  if (data.feature_names != model.feature_names) throw SchemaError("dataset feature schema differs from the model's");
}

}  // namespace

ClassifierModel finetune(ClassifierModel model, const Dataset& train, const Dataset& val, const FinetuneConfig& cfg) {
  cfg.validate();
  check_feature_names(model, train);
  check_feature_names(model, val);
  if (!val.has_both_classes()) throw UndefinedMetric("validation set has a single class; AUC undefined");
  if (train.rows() == 0) throw DataError("empty training set");

  const Matrix x_train = model.standardizer.transform(train.features);
  const Matrix x_val = model.standardizer.transform(val.features);
  const std::vector<double> y_val(val.outcome.data(), val.outcome.data() + val.outcome.size());
  const std::size_t first_trainable = cfg.freeze_encoder ? model.encoder_layers : 0;

  nn::AdamState adam(model.network, {.learning_rate = cfg.learning_rate, .l2 = cfg.l2});
  Rng rng(derive_seed(cfg.seed, 12));
  EarlyStopping stopper(cfg.patience);
  nn::MlpParams best = model.network;
  model.history.clear();

  const Eigen::Index n = x_train.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(std::span<Eigen::Index>(order));
    double loss_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index b = std::min<Eigen::Index>(cfg.batch_size, n - start);
      Matrix xb(b, x_train.cols());
      Vector yb(b);
      for (Eigen::Index i = 0; i < b; ++i) {
        const Eigen::Index r = order[static_cast<std::size_t>(start + i)];
        xb.row(i) = x_train.row(r);
        yb[i] = train.outcome[r];
      }
      const nn::ActivationTrace trace = nn::forward(model.network, xb, cfg.dropout, nn::Mode::kTrain, rng);
      const nn::BceResult bce = nn::bce_with_logits(trace.output().col(0), yb);
      if (!std::isfinite(bce.loss)) {
        throw NumericalError("non-finite fine-tuning loss at epoch " + std::to_string(epoch));
      }
      const nn::GradientSet grads = nn::backward(model.network, trace, Matrix(bce.grad_logits));
      nn::adam_step(adam, model.network, grads, first_trainable);
      loss_sum += bce.loss * static_cast<double>(b);
    }
    const Vector logits = nn::predict(model.network, x_val).col(0);
    const std::vector<double> scores(logits.data(), logits.data() + logits.size());
    const double val_auc = metrics::auc(scores, y_val);
    model.history.push_back({epoch, loss_sum / static_cast<double>(n), val_auc});
    if (stopper.observe(val_auc)) best = model.network;
    if (stopper.should_stop()) break;
  }
  model.network = std::move(best);
  model.best_epoch = stopper.best_epoch();
  model.provenance.config = cfg;
  model.provenance.seed = cfg.seed;
  return model;
}

ClassifierModel finetune(ClassifierModel model, const Dataset& sample, const FinetuneConfig& cfg) {
  cfg.validate();
  const Split split = outcome_stratified_holdout(sample, cfg.val_fraction, derive_seed(cfg.seed, 14));
  return finetune(std::move(model), sample.subset(split.train), sample.subset(split.test), cfg);
}

Vector predict_proba(const ClassifierModel& model, const Matrix& rows) {
  check_schema(model, rows);
  return nn::sigmoid(Vector(nn::predict(model.network, model.standardizer.transform(rows)).col(0)));
}

std::vector<std::uint64_t> default_ensemble_seeds(std::uint64_t master, std::size_t count) {
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < count; ++i) seeds.push_back(master + i);
  return seeds;
}

Ensemble train_ensemble(const tmae::EncoderCheckpoint& ckpt, const Dataset& train, const Dataset& val,
                        const FinetuneConfig& cfg, std::span<const std::uint64_t> seeds, int jobs,
                        bool allow_duplicate_seeds) {
  if (seeds.empty()) throw InvalidArgument("ensemble needs at least one seed");
  if (!allow_duplicate_seeds && std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw InvalidArgument("ensemble seeds must be distinct");
  }
  Ensemble ensemble;
  ensemble.seeds.assign(seeds.begin(), seeds.end());
  ensemble.members.resize(seeds.size());
  parallel_for(seeds.size(), jobs, [&](std::size_t i) {
    FinetuneConfig member_cfg = cfg;
    member_cfg.seed = seeds[i];
    ensemble.members[i] = finetune(init_from_encoder(ckpt, member_cfg), train, val, member_cfg);
  });
  return ensemble;
}

Vector predict_proba(const Ensemble& ensemble, const Matrix& rows) {
  if (ensemble.members.empty()) throw InvalidArgument("empty ensemble");
  Vector sum = Vector::Zero(rows.rows());
  for (const auto& m : ensemble.members) sum += predict_proba(m, rows);
  return sum / static_cast<double>(ensemble.members.size());
}

json model_to_json(const ClassifierModel& model) {
  json history = json::array();
  for (const auto& h : model.history) {
    history.push_back({{"epoch", h.epoch}, {"train_loss", h.train_loss}, {"val_auc", h.val_auc}});
  }
  return {{"format", kModelFormat},
          {"feature_names", model.feature_names},
          {"standardizer", io::to_json(model.standardizer)},
          {"encoder_layers", model.encoder_layers},
          {"network", io::to_json(model.network)},
          {"best_epoch", model.best_epoch},
          {"history", std::move(history)},
          {"provenance",
           {{"kind", model.provenance.kind},
            {"checkpoint_id", model.provenance.checkpoint_id},
            {"seed", model.provenance.seed},
            {"config", to_json(model.provenance.config)}}}};
}

ClassifierModel model_from_json(const json& j) {
  io::expect_format(j, kModelFormat);
  ClassifierModel m;
  try {
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.standardizer = io::standardizer_from_json(j.at("standardizer"));
    m.encoder_layers = j.at("encoder_layers").get<std::size_t>();
    m.network = io::mlp_from_json(j.at("network"));
    m.best_epoch = j.value("best_epoch", 0);
    for (const auto& h : j.at("history")) {
      m.history.push_back({h.at("epoch").get<int>(), h.at("train_loss").get<double>(), h.at("val_auc").get<double>()});
    }
    const auto& p = j.at("provenance");
    m.provenance.kind = p.at("kind").get<std::string>();
    m.provenance.checkpoint_id = p.at("checkpoint_id").get<std::string>();
    m.provenance.seed = p.at("seed").get<std::uint64_t>();
    m.provenance.config = finetune_config_from_json(p.at("config"));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed classifier model: ") + e.what());
  }
  if (m.feature_names.size() != static_cast<std::size_t>(m.network.input_dim())) {
    throw SchemaError("classifier feature_names length differs from network input");
  }
  m.standardizer.validate(m.feature_names);
  return m;
}

json ensemble_to_json(const Ensemble& ensemble) {
  json members = json::array();
  for (const auto& m : ensemble.members) members.push_back(model_to_json(m));
  return {{"format", kEnsembleFormat}, {"seeds", ensemble.seeds}, {"members", std::move(members)}};
}

Ensemble ensemble_from_json(const json& j) {
  io::expect_format(j, kEnsembleFormat);
  Ensemble e;
  e.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  for (const auto& m : j.at("members")) e.members.push_back(model_from_json(m));
  if (e.members.empty()) throw SchemaError("ensemble has no members");
  for (const auto& m : e.members) {
    if (m.feature_names != e.members.front().feature_names) throw SchemaError("ensemble members disagree on schema");
  }
  return e;
}

}  // namespace devenc::classifier
