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

#include "devenc/hpo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "devenc/classifier.hpp"
#include "devenc/error.hpp"
#include "devenc/ingest.hpp"
#include "devenc/metrics.hpp"
#include "devenc/parallel.hpp"
#include "devenc/tmae.hpp"

namespace devenc::hpo {

using nlohmann::json;

json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"l2", c.l2},
          {"hidden1", c.hidden1},             {"hidden2", c.hidden2},
          {"dropout", c.dropout},             {"batch_size", c.batch_size},
          {"mask_ratio", c.mask_ratio}};
}

void SearchSpace::validate() const {
  if (!(0.0 < learning_rate_min && learning_rate_min <= learning_rate_max)) {
    throw InvalidArgument("learning_rate bounds must satisfy 0 < min <= max");
  }
  if (!(0.0 < l2_min && l2_min <= l2_max)) throw InvalidArgument("l2 bounds must satisfy 0 < min <= max");
  if (!(1 <= hidden2_min && hidden2_min <= hidden2_max)) throw InvalidArgument("bad hidden2 bounds");
  if (!(hidden2_min < hidden1_max && hidden1_min <= hidden1_max)) throw InvalidArgument("bad hidden1 bounds");
  if (!(0.0 <= dropout_min && dropout_min <= dropout_max && dropout_max < 1.0)) {
    throw InvalidArgument("dropout bounds must lie in [0, 1)");
  }
  if (!(1 <= batch_size_min && batch_size_min <= batch_size_max)) throw InvalidArgument("bad batch_size bounds");
  if (!(0.0 < mask_ratio_min && mask_ratio_min <= mask_ratio_max && mask_ratio_max < 1.0)) {
    throw InvalidArgument("mask_ratio bounds must lie in (0, 1)");
  }
}

namespace {

int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

double log_uniform(Rng& rng, double lo, double hi) { return std::exp(rng.uniform(std::log(lo), std::log(hi))); }

}  // namespace

TrainConfig SearchSpace::sample(Rng& rng) const {
  TrainConfig c;
  c.learning_rate = log_uniform(rng, learning_rate_min, learning_rate_max);
  c.l2 = log_uniform(rng, l2_min, l2_max);
  c.hidden1 = uniform_int(rng, std::max(hidden1_min, hidden2_min + 1), hidden1_max);
  c.hidden2 = uniform_int(rng, hidden2_min, std::min(hidden2_max, c.hidden1 - 1));
  c.dropout = rng.uniform(dropout_min, dropout_max);
  c.batch_size = uniform_int(rng, batch_size_min, batch_size_max);
  c.mask_ratio = rng.uniform(mask_ratio_min, mask_ratio_max);
  return c;
}

bool SearchSpace::contains(const TrainConfig& c) const {
  return learning_rate_min <= c.learning_rate && c.learning_rate <= learning_rate_max && l2_min <= c.l2 &&
         c.l2 <= l2_max && hidden1_min <= c.hidden1 && c.hidden1 <= hidden1_max && hidden2_min <= c.hidden2 &&
         c.hidden2 <= hidden2_max && c.hidden2 < c.hidden1 && dropout_min <= c.dropout && c.dropout <= dropout_max &&
         batch_size_min <= c.batch_size && c.batch_size <= batch_size_max && mask_ratio_min <= c.mask_ratio &&
         c.mask_ratio <= mask_ratio_max;
}

json to_json(const SearchSpace& s) {
  return {{"learning_rate", {s.learning_rate_min, s.learning_rate_max}},
          {"l2", {s.l2_min, s.l2_max}},
          {"hidden1", {s.hidden1_min, s.hidden1_max}},
          {"hidden2", {s.hidden2_min, s.hidden2_max}},
          {"dropout", {s.dropout_min, s.dropout_max}},
          {"batch_size", {s.batch_size_min, s.batch_size_max}},
          {"mask_ratio", {s.mask_ratio_min, s.mask_ratio_max}}};
}

SearchSpace search_space_from_json(const json& j, SearchSpace base) {
  static const std::set<std::string> known{"learning_rate", "l2",         "hidden1",   "hidden2",
                                           "dropout",       "batch_size", "mask_ratio"};
  if (!j.is_object()) throw SchemaError("search space must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw SchemaError("unknown search space entry: " + key);
  }
  auto range = [&](const char* key, auto& lo, auto& hi) {
    if (!j.contains(key)) return;
    const auto& r = j.at(key);
    if (!r.is_array() || r.size() != 2) throw SchemaError(std::string("search space entry ") + key + " must be [min, max]");
    lo = r[0].get<std::remove_reference_t<decltype(lo)>>();
    hi = r[1].get<std::remove_reference_t<decltype(hi)>>();
  };
  range("learning_rate", base.learning_rate_min, base.learning_rate_max);
  range("l2", base.l2_min, base.l2_max);
  range("hidden1", base.hidden1_min, base.hidden1_max);
  range("hidden2", base.hidden2_min, base.hidden2_max);
  range("dropout", base.dropout_min, base.dropout_max);
  range("batch_size", base.batch_size_min, base.batch_size_max);
  range("mask_ratio", base.mask_ratio_min, base.mask_ratio_max);
  base.validate();
  return base;
}

double fairness_objective(const std::map<std::string, double>& per_country_auc) {
  if (per_country_auc.empty()) throw InvalidArgument("fairness objective needs at least one country");
  double sum = 0.0;
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& [country, auc] : per_country_auc) {
    sum += auc;
    lowest = std::min(lowest, auc);
  }
  return sum / static_cast<double>(per_country_auc.size()) + 2.0 * lowest;
}

SearchResult run_search(const SearchSpace& space, const Dataset& data, const std::vector<std::string>& search_countries,
                        const std::vector<std::string>& validation_countries, const SearchConfig& cfg) {
  space.validate();
  if (cfg.trials < 1) throw InvalidArgument("trials must be >= 1");
  if (search_countries.empty() || validation_countries.empty()) {
    throw InvalidArgument("search and validation country lists must be non-empty");
  }
  for (const auto& c : validation_countries) {
    if (std::find(search_countries.begin(), search_countries.end(), c) != search_countries.end()) {
      throw InvalidArgument("country " + c + " is in both the search and validation lists");
    }
  }
  const Dataset search = data.subset(data.rows_of_countries(search_countries));
  if (search.rows() == 0) throw DataError("no rows for the search countries");
  std::vector<Dataset> validation;
  for (const auto& c : validation_countries) {
    validation.push_back(data.subset(data.rows_of_country(c)));
    if (validation.back().rows() == 0) throw DataError("no rows for validation country " + c);
  }

  SearchResult result;
  result.log.resize(static_cast<std::size_t>(cfg.trials));
  // Configs are drawn sequentially so the log does not depend on jobs.
  Rng sampler(cfg.seed);
  for (int t = 0; t < cfg.trials; ++t) {
    result.log[t].index = t;
    result.log[t].config = space.sample(sampler);
    result.log[t].seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(t) + 1);
  }
  parallel_for(result.log.size(), cfg.jobs, [&](std::size_t t) {
    TrialRecord& trial = result.log[t];
    const auto start = std::chrono::steady_clock::now();
    const TrainConfig& c = trial.config;
    try {
      tmae::PretrainConfig pc;
      pc.epochs = cfg.pretrain_epochs;
      pc.batch_size = c.batch_size;
      pc.learning_rate = c.learning_rate;
      pc.mask_ratio = c.mask_ratio;
      pc.hidden_dims = {c.hidden1, c.hidden2};
      pc.seed = trial.seed;
      const auto ckpt = tmae::pretrain(search.features, search.feature_names, pc);
      classifier::FinetuneConfig fc;
      fc.learning_rate = c.learning_rate;
      fc.l2 = c.l2;
      fc.dropout = c.dropout;
      fc.batch_size = c.batch_size;
      fc.max_epochs = cfg.finetune_max_epochs;
      fc.seed = trial.seed;
      const auto model = classifier::finetune(classifier::init_from_encoder(ckpt, fc), search, fc);
      for (std::size_t v = 0; v < validation.size(); ++v) {
        const Vector p = classifier::predict_proba(model, validation[v].features);
        trial.per_country_auc[validation_countries[v]] = metrics::auc(as_span(p), as_span(validation[v].outcome));
      }
      trial.objective = fairness_objective(trial.per_country_auc);
      std::vector<double> values;
      for (const auto& [country, auc] : trial.per_country_auc) values.push_back(auc);
      trial.mean_auc = metrics::mean(values);
      trial.min_auc = *std::min_element(values.begin(), values.end());
    } catch (const NumericalError& e) {
      trial.ok = false;
      trial.error = e.what();
    } catch (const UndefinedMetric& e) {
      trial.ok = false;
      trial.error = e.what();
    }
    trial.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  const TrialRecord* best = nullptr;
  for (const auto& trial : result.log) {
    if (trial.ok && (best == nullptr || trial.objective > best->objective)) best = &trial;
  }
  if (best == nullptr) throw NumericalError("every search trial failed");
  result.best = *best;
  return result;
}

std::string log_csv(const SearchResult& result) {
  std::ostringstream out;
  out << "trial_index,learning_rate,l2,hidden1,hidden2,dropout,batch_size,mask_ratio,mean_auc,min_auc,objective,status\n";
  for (const auto& t : result.log) {
    const auto& c = t.config;
    out << t.index << ',' << format_double(c.learning_rate) << ',' << format_double(c.l2) << ',' << c.hidden1 << ','
        << c.hidden2 << ',' << format_double(c.dropout) << ',' << c.batch_size << ',' << format_double(c.mask_ratio)
        << ',';
    if (t.ok) {
      out << format_double(t.mean_auc) << ',' << format_double(t.min_auc) << ',' << format_double(t.objective) << ",ok\n";
    } else {
      out << ",,,failed\n";
    }
  }
  return out.str();
}

json to_json(const TrialRecord& t) {
  json j = {{"trial_index", t.index}, {"config", to_json(t.config)}, {"seed", t.seed},
            {"status", t.ok ? "ok" : "failed"}};
  if (t.ok) {
    j["per_country_auc"] = t.per_country_auc;
    j["mean_auc"] = t.mean_auc;
    j["min_auc"] = t.min_auc;
    j["objective"] = t.objective;
  } else {
    j["error"] = t.error;
  }
  return j;
}

}  // namespace devenc::hpo
