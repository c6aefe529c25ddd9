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

#include "devenc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "devenc/error.hpp"
#include "devenc/parallel.hpp"
#include "devenc/rng.hpp"
#include "devenc/splits.hpp"

namespace devenc::eval {

Predictor predictor_of(const classifier::ClassifierModel& model) {
  return [model](const Matrix& rows) { return classifier::predict_proba(model, rows); };
}

Predictor predictor_of(const classifier::Ensemble& ensemble) {
  return [ensemble](const Matrix& rows) { return classifier::predict_proba(ensemble, rows); };
}

Predictor predictor_of(const baselines::GbdtModel& model) {
  return [model](const Matrix& rows) { return baselines::predict_gbdt(model, rows); };
}

double evaluate_auc(const Predictor& predict, const Dataset& data) {
  const Vector p = predict(data.features);
  return metrics::auc(as_span(p), as_span(data.outcome));
}

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

json group_json(const GroupValue& g) {
  json j = {{"group", g.group}, {"n", g.n}, {"defined", g.defined}};
  j["value"] = g.defined ? json(g.value) : json(nullptr);
  if (!g.note.empty()) j["note"] = g.note;
  return j;
}

}  // namespace

json to_json(const EvalReport& r) {
  json groups = json::array();
  for (const auto& g : r.per_group) groups.push_back(group_json(g));
  return {{"metric", r.metric},
          {"point", r.point},
          {"ci_low", r.ci_low},
          {"ci_high", r.ci_high},
          {"n_resamples", r.n_resamples},
          {"seed", r.seed},
          {"per_group", std::move(groups)},
          {"config", r.config},
          {"resample_values", r.resample_values}};
}

std::string to_text(const EvalReport& r) {
  std::ostringstream out;
  out << r.metric << "  " << fixed(r.point) << "  95% CI [" << fixed(r.ci_low) << ", " << fixed(r.ci_high) << "]"
      << "  resamples " << r.n_resamples << "  seed " << r.seed << "\n";
  if (!r.per_group.empty()) {
    std::size_t width = 5;
    for (const auto& g : r.per_group) width = std::max(width, g.group.size());
    char line[256];
    std::snprintf(line, sizeof(line), "%-*s  %8s  %8s\n", static_cast<int>(width), "group", "n", r.metric.c_str());
    out << line;
    for (const auto& g : r.per_group) {
      const std::string value = g.defined ? fixed(g.value) : "undef";
      std::snprintf(line, sizeof(line), "%-*s  %8zu  %8s%s\n", static_cast<int>(width), g.group.c_str(), g.n,
                    value.c_str(), g.note.empty() ? "" : ("  " + g.note).c_str());
      out << line;
    }
  }
  return out.str();
}

// ---- bootstrap ----

std::vector<std::size_t> country_stratified_resample(const Dataset& data, Rng& rng) {
  std::vector<std::size_t> out;
  out.reserve(data.rows());
  for (const auto& c : data.countries()) {
    const auto rows = data.rows_of_country(c);
    for (std::size_t i = 0; i < rows.size(); ++i) out.push_back(rows[rng.below(rows.size())]);
  }
  return out;
}

EvalReport bootstrap_ci(const TrainEvalClosure& closure, const Dataset& train, const BootstrapConfig& cfg,
                        const std::string& metric) {
  if (cfg.n_resamples < 1) throw InvalidArgument("n_resamples must be >= 1");
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw InvalidArgument("confidence level must be in (0, 1)");
  if (train.rows() == 0) throw DataError("bootstrap needs a non-empty training set");
  const bool need_both = train.has_both_classes();

  std::vector<double> values(static_cast<std::size_t>(cfg.n_resamples));
  parallel_for(values.size(), cfg.jobs, [&](std::size_t b) {
    const std::uint64_t seed = derive_seed(cfg.seed, b + 1);
    Rng rng(seed);
    std::vector<std::size_t> idx = country_stratified_resample(train, rng);
    Dataset resample = train.subset(idx);
    for (int retry = 0; need_both && !resample.has_both_classes(); ++retry) {
      if (retry >= cfg.max_retries) {
        throw DataError("bootstrap resample " + std::to_string(b) + " lost an outcome class after " +
                        std::to_string(cfg.max_retries) + " redraws");
      }
      idx = country_stratified_resample(train, rng);
      resample = train.subset(idx);
    }
    values[b] = closure(resample, seed);
  });

  EvalReport r;
  r.metric = metric;
  r.point = closure(train, cfg.seed);
  const double alpha = 1.0 - cfg.level;
  r.ci_low = metrics::percentile(values, alpha / 2.0);
  r.ci_high = metrics::percentile(values, 1.0 - alpha / 2.0);
  r.n_resamples = cfg.n_resamples;
  r.seed = cfg.seed;
  r.config = {{"n_resamples", cfg.n_resamples}, {"level", cfg.level}, {"max_retries", cfg.max_retries},
              {"stratify", "country"}};
  r.resample_values = std::move(values);
  return r;
}

// ---- leave-one-country-out ----

double LocoResult::mean_auc() const {
  std::vector<double> v;
  for (const auto& f : folds) {
    if (f.defined) v.push_back(f.auc);
  }
  if (v.empty()) throw UndefinedMetric("no LOCO fold has a defined AUC");
  return metrics::mean(v);
}

EvalReport LocoResult::report() const {
  EvalReport r;
  r.metric = "auc";
  r.seed = seed;
  std::vector<double> v;
  for (const auto& f : folds) {
    r.per_group.push_back({f.country, f.n_test, f.auc, f.defined, f.note});
    if (f.defined) v.push_back(f.auc);
  }
  std::sort(r.per_group.begin(), r.per_group.end(), [](const GroupValue& a, const GroupValue& b) {
    if (a.defined != b.defined) return a.defined;
    return a.value != b.value ? a.value > b.value : a.group < b.group;
  });
  if (!v.empty()) {
    r.point = metrics::mean(v);
    r.ci_low = *std::min_element(v.begin(), v.end());
    r.ci_high = *std::max_element(v.begin(), v.end());
  }
  r.config = {{"protocol", "loco"}, {"interval", "min-max over held-out countries"}};
  return r;
}

LocoResult loco_run(const Trainer& trainer, const Dataset& data, std::uint64_t seed, int jobs) {
  const auto countries = data.countries();
  if (countries.size() < 2) throw InvalidArgument("LOCO needs at least two countries");
  LocoResult result;
  result.seed = seed;
  result.folds.resize(countries.size());
  parallel_for(countries.size(), jobs, [&](std::size_t k) {
    const std::vector<std::string> held{countries[k]};
    const Split split = country_split(data, held);
    LocoFold& fold = result.folds[k];
    fold.country = countries[k];
    fold.n_train = split.train.size();
    fold.n_test = split.test.size();
    fold.overlap = row_id_overlap(data, split.train, split.test);
    if (fold.overlap != 0) {
      throw DataError("LOCO fold " + countries[k] + " shares " + std::to_string(fold.overlap) + " row_ids");
    }
    const Dataset test = data.subset(split.test);
    const Predictor predict = trainer(data.subset(split.train), derive_seed(seed, k));
    if (!test.has_both_classes()) {
      fold.defined = false;
      fold.note = "AUC undefined: single-class country";
      return;
    }
    fold.auc = evaluate_auc(predict, test);
  });
  return result;
}

// ---- importance ----

const ImportanceRow& ImportanceResult::row(const std::string& feature) const {
  for (const auto& r : rows) {
    if (r.feature == feature) return r;
  }
  throw InvalidArgument("no importance row for feature " + feature);
}

ImportanceResult permutation_importance(const Predictor& predict, const Dataset& data, int n_repeats,
                                        std::uint64_t seed, int jobs) {
  if (n_repeats < 1) throw InvalidArgument("n_repeats must be >= 1");
  ImportanceResult result;
  result.baseline_auc = evaluate_auc(predict, data);
  result.n_repeats = n_repeats;
  result.seed = seed;
  const std::size_t d = data.cols();
  result.rows.resize(d);
  parallel_for(d, jobs, [&](std::size_t j) {
    Rng rng(derive_seed(seed, j));
    Matrix x = data.features;
    const Vector original = data.features.col(static_cast<Eigen::Index>(j));
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(x.rows()));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::vector<double> drops(static_cast<std::size_t>(n_repeats));
    for (int r = 0; r < n_repeats; ++r) {
      rng.shuffle(std::span<Eigen::Index>(perm));
      for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, static_cast<Eigen::Index>(j)) = original[perm[i]];
      const Vector p = predict(x);
      drops[r] = result.baseline_auc - metrics::auc(as_span(p), as_span(data.outcome));
    }
    ImportanceRow& row = result.rows[j];
    row.feature = data.feature_names[j];
    row.importance = metrics::mean(drops);
    row.ci_low = metrics::percentile(drops, 0.025);
    row.ci_high = metrics::percentile(drops, 0.975);
  });
  std::stable_sort(result.rows.begin(), result.rows.end(),
                   [](const ImportanceRow& a, const ImportanceRow& b) { return a.importance > b.importance; });
  return result;
}

json to_json(const ImportanceResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"feature", r.feature}, {"importance", r.importance}, {"ci_low", r.ci_low}, {"ci_high", r.ci_high}});
  }
  return {{"baseline_auc", result.baseline_auc},
          {"n_repeats", result.n_repeats},
          {"seed", result.seed},
          {"features", std::move(rows)}};
}

std::string to_text(const ImportanceResult& result) {
  std::ostringstream out;
  out << "baseline auc " << fixed(result.baseline_auc) << ", " << result.n_repeats << " shuffles per feature\n";
  std::size_t width = 7;
  for (const auto& r : result.rows) width = std::max(width, r.feature.size());
  char line[256];
  for (const auto& r : result.rows) {
    std::snprintf(line, sizeof(line), "%-*s  %.3f [%.3f, %.3f]\n", static_cast<int>(width), r.feature.c_str(),
                  r.importance, r.ci_low, r.ci_high);
    out << line;
  }
  return out.str();
}

// ---- equity ----

EquityResult equity_audit(const Predictor& predict, const Dataset& data) {
  if (data.wealth_quintile.size() != data.rows()) throw DataError("wealth quintiles are not populated");
  const Vector p = predict(data.features);
  EquityResult result;
  for (int q = 1; q <= 5; ++q) {
    std::vector<double> scores, labels;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      if (data.wealth_quintile[i] == q) {
        scores.push_back(p[static_cast<Eigen::Index>(i)]);
        labels.push_back(data.outcome[static_cast<Eigen::Index>(i)]);
      }
    }
    QuintileRow row;
    row.quintile = q;
    row.n = scores.size();
    try {
      row.auc = metrics::auc(scores, labels);
    } catch (const UndefinedMetric&) {
      row.defined = false;
      row.note = "AUC undefined: single-class or empty quintile";
    }
    result.rows.push_back(row);
  }
  std::size_t total = 0;
  for (const auto& r : result.rows) total += r.n;
  if (total != data.rows()) throw DataError("wealth quintiles outside 1..5");
  result.ratio_defined = result.rows[0].defined && result.rows[4].defined && result.rows[0].auc > 0.0;
  if (result.ratio_defined) result.ratio = result.rows[4].auc / result.rows[0].auc;
  return result;
}

json to_json(const EquityResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows) {
    json j = {{"quintile", "Q" + std::to_string(r.quintile)}, {"n", r.n}, {"defined", r.defined}};
    j["auc"] = r.defined ? json(r.auc) : json(nullptr);
    if (!r.note.empty()) j["note"] = r.note;
    rows.push_back(std::move(j));
  }
  json out = {{"quintiles", std::move(rows)}};
  out["ratio_q5_q1"] = result.ratio_defined ? json(result.ratio) : json(nullptr);
  return out;
}

// ---- calibration ----

CalibrationResult calibration_report(const Predictor& predict, const Dataset& data, int n_bins) {
  const Vector p = predict(data.features);
  CalibrationResult r;
  r.n = data.rows();
  r.brier = metrics::brier(as_span(p), as_span(data.outcome));
  r.ece = metrics::ece(as_span(p), as_span(data.outcome), n_bins);
  r.bins = metrics::reliability_bins(as_span(p), as_span(data.outcome), n_bins);
  return r;
}

json to_json(const CalibrationResult& result) {
  json bins = json::array();
  for (const auto& b : result.bins) {
    bins.push_back({{"lower", b.lower},
                    {"upper", b.upper},
                    {"count", b.count},
                    {"mean_confidence", b.mean_confidence},
                    {"observed_rate", b.observed_rate}});
  }
  return {{"n", result.n}, {"brier", result.brier}, {"ece", result.ece}, {"bins", std::move(bins)}};
}

// ---- divergence ----

DivergenceResult proxy_divergence(const Matrix& source, const Matrix& target, std::uint64_t seed) {
  if (source.rows() < 50 || target.rows() < 50) throw InvalidArgument("proxy divergence needs >= 50 rows per domain");
  if (source.cols() != target.cols()) throw ShapeError("source and target differ in feature count");
  Rng rng(seed);
  const auto m = static_cast<std::size_t>(std::min(source.rows(), target.rows()));
  auto pick = [&](const Matrix& x) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.rows()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    rng.shuffle(std::span<Eigen::Index>(idx));
    idx.resize(m);
    return idx;
  };
  const auto src = pick(source);
  const auto tgt = pick(target);
  const std::size_t half = m / 2;
  const auto n_fit = static_cast<Eigen::Index>(2 * half);
  const auto n_eval = static_cast<Eigen::Index>(2 * (m - half));
  Matrix x_fit(n_fit, source.cols()), x_eval(n_eval, source.cols());
  Vector y_fit(n_fit), y_eval(n_eval);
  Eigen::Index f = 0, e = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const bool fit = i < half;
    Matrix& x = fit ? x_fit : x_eval;
    Vector& y = fit ? y_fit : y_eval;
    Eigen::Index& k = fit ? f : e;
    x.row(k) = source.row(src[i]);
    y[k++] = 0.0;
    x.row(k) = target.row(tgt[i]);
    y[k++] = 1.0;
  }
  const std::vector<std::string> names(static_cast<std::size_t>(source.cols()), "x");
  const Standardizer st = fit_standardizer(x_fit, names, ZeroVariance::kUnitScale);
  const baselines::LogisticModel model = baselines::fit_logistic(st.transform(x_fit), y_fit, {.l2 = 1e-3});
  const Vector p = baselines::predict_logistic(model, st.transform(x_eval));
  double correct = 0.0;
  for (Eigen::Index i = 0; i < n_eval; ++i) correct += ((p[i] > 0.5) == (y_eval[i] > 0.5)) ? 1.0 : 0.0;
  DivergenceResult r;
  r.accuracy = correct / static_cast<double>(n_eval);
  r.d_hat = std::clamp(2.0 * (2.0 * r.accuracy - 1.0), 0.0, 2.0);
  r.n_per_domain = m;
  return r;
}

json to_json(const DivergenceResult& result) {
  return {{"d_hat", result.d_hat}, {"accuracy", result.accuracy}, {"n_per_domain", result.n_per_domain}};
}

}  // namespace devenc::eval
