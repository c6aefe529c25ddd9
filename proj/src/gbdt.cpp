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

#include <algorithm>
#include <cmath>

#include "devenc/baselines.hpp"
#include "devenc/error.hpp"
#include "devenc/metrics.hpp"
#include "devenc/nn.hpp"
#include "devenc/serialize.hpp"
#include "devenc/splits.hpp"

namespace devenc::baselines {

using nlohmann::json;

namespace {

constexpr double kMinHessian = 1e-3;
constexpr double kMinGain = 1e-12;

double logit(double p) { return std::log(p / (1.0 - p)); }

double clamp_probability(double p) { return std::clamp(p, nn::kProbabilityClamp, 1.0 - nn::kProbabilityClamp); }

double mean_log_loss(const Vector& raw, const Vector& y) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    const double p = clamp_probability(nn::sigmoid(raw[i]));
    total -= y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
  }
  return total / static_cast<double>(raw.size());
}

std::vector<std::vector<std::uint16_t>> bin_matrix(const Matrix& x, const std::vector<std::vector<double>>& edges) {
  std::vector<std::vector<std::uint16_t>> binned(edges.size(), std::vector<std::uint16_t>(x.rows()));
  for (std::size_t f = 0; f < edges.size(); ++f) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) binned[f][i] = bin_of(x(i, f), edges[f]);
  }
  return binned;
}

double leaf_value(double g, double h, double lambda_l2) { return -g / std::max(h + lambda_l2, kMinHessian); }

struct Grower {
  const std::vector<std::vector<std::uint16_t>>& binned;
  const std::vector<double>& grad;
  const std::vector<double>& hess;
  const std::vector<int>& bins_per_feature;
  const GbdtConfig& cfg;
  Tree tree;

  int grow(std::vector<std::size_t> rows, int depth) {
    double g = 0.0, h = 0.0;
    for (std::size_t r : rows) {
      g += grad[r];
      h += hess[r];
    }
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[index].count = static_cast<int>(rows.size());
    tree.nodes[index].value = leaf_value(g, h, cfg.lambda_l2);
    if (depth >= cfg.max_depth || rows.size() < 2 * static_cast<std::size_t>(cfg.min_samples_leaf)) return index;

    const SplitCandidate split =
        best_split(binned, rows, grad, hess, bins_per_feature, cfg.min_samples_leaf, cfg.lambda_l2);
    if (!split.valid() || split.gain <= kMinGain) return index;

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      (binned[split.feature][r] <= split.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    TreeNode& node = tree.nodes[index];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return index;
  }
};

std::vector<std::uint16_t> row_bins(const GbdtModel& model, const Matrix& rows, Eigen::Index i) {
  std::vector<std::uint16_t> bins(model.bin_edges.size());
  for (std::size_t f = 0; f < bins.size(); ++f) bins[f] = bin_of(rows(i, f), model.bin_edges[f]);
  return bins;
}

}  // namespace

void GbdtConfig::validate() const {
  if (n_estimators < 0) throw InvalidArgument("n_estimators must be >= 0");
  if (max_depth < 1) throw InvalidArgument("max_depth must be >= 1");
  if (n_bins < 2 || n_bins > 65535) throw InvalidArgument("n_bins must be in [2, 65535]");
  if (min_samples_leaf < 1) throw InvalidArgument("min_samples_leaf must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
  if (early_stopping_rounds < 1) throw InvalidArgument("early_stopping_rounds must be >= 1");
  if (lambda_l2 < 0.0) throw InvalidArgument("lambda_l2 must be >= 0");
}

json to_json(const GbdtConfig& cfg) {
  return {{"n_estimators", cfg.n_estimators},
          {"max_depth", cfg.max_depth},
          {"learning_rate", cfg.learning_rate},
          {"min_samples_leaf", cfg.min_samples_leaf},
          {"n_bins", cfg.n_bins},
          {"early_stopping_rounds", cfg.early_stopping_rounds},
          {"lambda_l2", cfg.lambda_l2},
          {"seed", cfg.seed}};
}

GbdtConfig gbdt_config_from_json(const json& j, GbdtConfig base) {
  base.n_estimators = j.value("n_estimators", base.n_estimators);
  base.max_depth = j.value("max_depth", base.max_depth);
  base.learning_rate = j.value("learning_rate", base.learning_rate);
  base.min_samples_leaf = j.value("min_samples_leaf", base.min_samples_leaf);
  base.n_bins = j.value("n_bins", base.n_bins);
  base.early_stopping_rounds = j.value("early_stopping_rounds", base.early_stopping_rounds);
  base.lambda_l2 = j.value("lambda_l2", base.lambda_l2);
  base.seed = j.value("seed", base.seed);
  return base;
}

int Tree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes[i].is_leaf()) {
      level[nodes[i].left] = level[i] + 1;
      level[nodes[i].right] = level[i] + 1;
    }
  }
  return deepest;
}

double Tree::predict(std::span<const std::uint16_t> bins) const {
  int i = 0;
  while (!nodes[i].is_leaf()) {
    i = bins[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  }
  return nodes[i].value;
}

std::vector<double> compute_bin_edges(std::span<const double> column, int n_bins) {
  std::vector<double> sorted(column.begin(), column.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<double> edges;
  if (distinct.size() <= static_cast<std::size_t>(n_bins)) {
    for (std::size_t i = 1; i < distinct.size(); ++i) edges.push_back(0.5 * (distinct[i - 1] + distinct[i]));
    return edges;
  }
  const std::size_t n = sorted.size();
  for (int b = 1; b < n_bins; ++b) {
    const std::size_t pos = static_cast<std::size_t>(static_cast<double>(b) * static_cast<double>(n) / n_bins);
    if (pos == 0 || pos >= n) continue;
    // Cut between the value at pos-1 and the next larger value.
    const double lo = sorted[pos - 1];
    const auto next = std::upper_bound(sorted.begin(), sorted.end(), lo);
    if (next == sorted.end()) continue;
    const double edge = 0.5 * (lo + *next);
    if (edges.empty() || edge > edges.back()) edges.push_back(edge);
  }
  return edges;
}

std::uint16_t bin_of(double value, std::span<const double> edges) {
  return static_cast<std::uint16_t>(std::lower_bound(edges.begin(), edges.end(), value) - edges.begin());
}

double split_gain(double g_left, double h_left, double g_right, double h_right, double lambda_l2) {
  const double g = g_left + g_right;
  const double h = h_left + h_right;
  return g_left * g_left / (h_left + lambda_l2) + g_right * g_right / (h_right + lambda_l2) - g * g / (h + lambda_l2);
}

SplitCandidate best_split(const std::vector<std::vector<std::uint16_t>>& binned, std::span<const std::size_t> rows,
                          std::span<const double> grad, std::span<const double> hess,
                          std::span<const int> bins_per_feature, int min_samples_leaf, double lambda_l2) {
  SplitCandidate best;
  double g_total = 0.0, h_total = 0.0;
  for (std::size_t r : rows) {
    g_total += grad[r];
    h_total += hess[r];
  }
  const auto n = static_cast<long>(rows.size());
  for (std::size_t f = 0; f < binned.size(); ++f) {
    const int nb = bins_per_feature[f];
    if (nb < 2) continue;
    std::vector<double> g(nb, 0.0), h(nb, 0.0);
    std::vector<long> c(nb, 0);
    for (std::size_t r : rows) {
      const int b = binned[f][r];
      g[b] += grad[r];
      h[b] += hess[r];
      ++c[b];
    }
    double gl = 0.0, hl = 0.0;
    long cl = 0;
    for (int t = 0; t + 1 < nb; ++t) {
      gl += g[t];
      hl += h[t];
      cl += c[t];
      if (cl < min_samples_leaf) continue;
      if (n - cl < min_samples_leaf) break;
      const double hr = h_total - hl;
      if (hl + lambda_l2 < kMinHessian || hr + lambda_l2 < kMinHessian) continue;
      const double gain = split_gain(gl, hl, g_total - gl, hr, lambda_l2);
      if (gain > best.gain || !best.valid()) {
        best = {static_cast<int>(f), t, gain};
      }
    }
  }
  return best;
}

GbdtModel train_gbdt(const Dataset& train, const Dataset* val, const GbdtConfig& cfg) {
  cfg.validate();
  if (train.rows() == 0) throw DataError("empty training set");
  if (val != nullptr && val->feature_names != train.feature_names) {
    throw SchemaError("validation schema differs from training schema");
  }
  GbdtModel model;
  model.feature_names = train.feature_names;
  model.learning_rate = cfg.learning_rate;
  model.config = cfg;
  const double rate = clamp_probability(train.prevalence());
  model.base_score = logit(rate);
  if (!train.has_both_classes()) {
    model.constant = true;
    model.warnings.push_back("single-class training labels; constant model");
    return model;
  }
  if (train.rows() < 2 * static_cast<std::size_t>(cfg.min_samples_leaf)) {
    throw InvalidArgument("training set smaller than 2 * min_samples_leaf");
  }

  const Eigen::Index n = train.features.rows();
  const auto d = static_cast<std::size_t>(train.features.cols());
  std::vector<int> bins_per_feature(d);
  for (std::size_t f = 0; f < d; ++f) {
    const Vector col = train.features.col(f);
    model.bin_edges.push_back(compute_bin_edges(as_span(col), cfg.n_bins));
    bins_per_feature[f] = static_cast<int>(model.bin_edges.back().size()) + 1;
  }
  const auto binned = bin_matrix(train.features, model.bin_edges);

  const bool early_stop = val != nullptr && val->has_both_classes();
  if (val != nullptr && !early_stop) model.warnings.push_back("validation set has a single class; early stopping off");
  std::vector<std::vector<std::uint16_t>> val_binned;
  Vector val_raw;
  if (early_stop) {
    val_binned = bin_matrix(val->features, model.bin_edges);
    val_raw = Vector::Constant(val->features.rows(), model.base_score);
  }
  classifier::EarlyStopping stopper(cfg.early_stopping_rounds);

  Vector raw = Vector::Constant(n, model.base_score);
  std::vector<double> grad(n), hess(n);
  std::vector<std::size_t> all_rows(n);
  for (Eigen::Index i = 0; i < n; ++i) all_rows[i] = static_cast<std::size_t>(i);
  std::vector<std::uint16_t> bins(d);

  for (int round = 0; round < cfg.n_estimators; ++round) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = nn::sigmoid(raw[i]);
      grad[i] = p - train.outcome[i];
      hess[i] = p * (1.0 - p);
    }
    Grower grower{binned, grad, hess, bins_per_feature, cfg, {}};
    grower.grow(all_rows, 0);
    Tree tree = std::move(grower.tree);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (std::size_t f = 0; f < d; ++f) bins[f] = binned[f][i];
      raw[i] += cfg.learning_rate * tree.predict(bins);
    }
    if (!raw.allFinite()) throw NumericalError("non-finite boosting score at round " + std::to_string(round + 1));
    model.trees.push_back(std::move(tree));
    model.train_loss.push_back(mean_log_loss(raw, train.outcome));
    if (early_stop) {
      for (Eigen::Index i = 0; i < val_raw.size(); ++i) {
        for (std::size_t f = 0; f < d; ++f) bins[f] = val_binned[f][i];
        val_raw[i] += cfg.learning_rate * model.trees.back().predict(bins);
      }
      stopper.observe(metrics::auc(as_span(val_raw), as_span(val->outcome)));
      if (stopper.should_stop()) break;
    }
  }
  if (early_stop) {
    model.best_iteration = stopper.best_epoch();
    model.trees.resize(static_cast<std::size_t>(model.best_iteration));
    model.train_loss.resize(static_cast<std::size_t>(model.best_iteration));
  } else {
    model.best_iteration = static_cast<int>(model.trees.size());
  }
  return model;
}

GbdtModel train_gbdt_with_holdout(const Dataset& sample, const GbdtConfig& cfg, double val_fraction) {
  const Split split = outcome_stratified_holdout(sample, val_fraction, derive_seed(cfg.seed, 14));
  const Dataset val = sample.subset(split.test);
  return train_gbdt(sample.subset(split.train), &val, cfg);
}

Vector gbdt_raw_score(const GbdtModel& model, const Matrix& rows) {
  if (static_cast<std::size_t>(rows.cols()) != model.feature_names.size()) {
    throw SchemaError("schema mismatch: rows have " + std::to_string(rows.cols()) + " features, model expects " +
                      std::to_string(model.feature_names.size()));
  }
  Vector raw = Vector::Constant(rows.rows(), model.base_score);
  if (model.trees.empty()) return raw;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const auto bins = row_bins(model, rows, i);
    for (const auto& tree : model.trees) raw[i] += model.learning_rate * tree.predict(bins);
  }
  return raw;
}

Vector predict_gbdt(const GbdtModel& model, const Matrix& rows) { return nn::sigmoid(gbdt_raw_score(model, rows)); }

json gbdt_to_json(const GbdtModel& model) {
  json trees = json::array();
  for (const auto& tree : model.trees) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"value", n.value},
                       {"count", n.count}});
    }
    trees.push_back(std::move(nodes));
  }
  return {{"format", kGbdtFormat},
          {"feature_names", model.feature_names},
          {"bin_edges", model.bin_edges},
          {"base_score", model.base_score},
          {"learning_rate", model.learning_rate},
          {"best_iteration", model.best_iteration},
          {"constant", model.constant},
          {"warnings", model.warnings},
          {"train_loss", model.train_loss},
          {"config", to_json(model.config)},
          {"trees", std::move(trees)}};
}

GbdtModel gbdt_from_json(const json& j) {
  io::expect_format(j, kGbdtFormat);
  GbdtModel m;
  try {
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.bin_edges = j.at("bin_edges").get<std::vector<std::vector<double>>>();
    m.base_score = j.at("base_score").get<double>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.best_iteration = j.value("best_iteration", 0);
    m.constant = j.value("constant", false);
    m.warnings = j.value("warnings", std::vector<std::string>{});
    m.train_loss = j.value("train_loss", std::vector<double>{});
    m.config = gbdt_config_from_json(j.at("config"));
    for (const auto& t : j.at("trees")) {
      Tree tree;
      for (const auto& n : t) {
        tree.nodes.push_back({n.at("feature").get<int>(), n.at("threshold").get<int>(), n.at("left").get<int>(),
                              n.at("right").get<int>(), n.at("value").get<double>(), n.at("count").get<int>()});
      }
      m.trees.push_back(std::move(tree));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed gbdt model: ") + e.what());
  }
  if (!m.trees.empty() && m.bin_edges.size() != m.feature_names.size()) {
    throw SchemaError("gbdt bin_edges do not match feature count");
  }
  for (const auto& tree : m.trees) {
    const auto count = static_cast<int>(tree.nodes.size());
    if (count == 0) throw SchemaError("gbdt tree without nodes");
    for (const auto& n : tree.nodes) {
      if (!n.is_leaf() && (n.left <= 0 || n.left >= count || n.right <= 0 || n.right >= count ||
                           n.feature >= static_cast<int>(m.feature_names.size()))) {
        throw SchemaError("gbdt tree has an out-of-range node reference");
      }
      if (!std::isfinite(n.value)) throw SchemaError("gbdt leaf value is not finite");
    }
  }
  return m;
}

}  // namespace devenc::baselines
