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
#include <numeric>
#include <sstream>

#include "devenc/error.hpp"
#include "devenc/eval.hpp"
#include "devenc/ingest.hpp"
#include "devenc/parallel.hpp"
#include "devenc/rng.hpp"
#include "devenc/splits.hpp"

namespace devenc::eval {

namespace {

const std::vector<std::string> kCurveModels{kPretrainedModel, kColdMlpModel, kGbdtModel};

struct FewShotTask {
  int n = 0;
  int seed_index = 0;
};

}  // namespace

double FewShotCurve::mean_auc(const std::string& model, int n) const {
  for (const auto& s : summary) {
    if (s.model == model && s.n == n) return s.mean;
  }
  throw InvalidArgument("no few-shot summary for " + model + " at n=" + std::to_string(n));
}

const FewShotComparison& FewShotCurve::comparison(const std::string& baseline, int n) const {
  for (const auto& c : comparisons) {
    if (c.baseline == baseline && c.n == n) return c;
  }
  throw InvalidArgument("no few-shot comparison for " + baseline + " at n=" + std::to_string(n));
}

FewShotCurve fewshot_curve(const tmae::EncoderCheckpoint& ckpt, const Dataset& target_region,
                           const std::string& tune_country, const FewShotConfig& cfg) {
  if (cfg.n_seeds < 1) throw InvalidArgument("n_seeds must be >= 1");
  if (cfg.ensemble_size < 1) throw InvalidArgument("ensemble_size must be >= 1");
  const auto countries = target_region.countries();
  if (countries.size() < 2) throw InvalidArgument("target region needs at least two countries");
  if (std::find(countries.begin(), countries.end(), tune_country) == countries.end()) {
    throw InvalidArgument("fine-tuning country " + tune_country + " is not in the target region data");
  }

  FewShotCurve curve;
  curve.tune_country = tune_country;
  for (const auto& c : countries) {
    if (c != tune_country) curve.eval_countries.push_back(c);
  }
  const Dataset eval_set = target_region.subset(target_region.rows_of_countries(curve.eval_countries));
  if (!eval_set.has_both_classes()) throw UndefinedMetric("evaluation countries hold a single outcome class");
  const std::size_t available = target_region.rows_of_country(tune_country).size();
  for (int n : cfg.sizes) {
    if (n < 1) throw InvalidArgument("few-shot sizes must be positive");
    if (static_cast<std::size_t>(n) > available) {
      curve.warnings.push_back("size " + std::to_string(n) + " skipped: " + tune_country + " has " +
                               std::to_string(available) + " rows");
      continue;
    }
    curve.sizes.push_back(n);
  }

  std::vector<FewShotTask> tasks;
  for (int n : curve.sizes) {
    for (int s = 0; s < cfg.n_seeds; ++s) tasks.push_back({n, s});
  }
  std::vector<std::array<double, 3>> aucs(tasks.size());
  std::vector<std::uint64_t> seeds(tasks.size());
  parallel_for(tasks.size(), cfg.jobs, [&](std::size_t t) {
    const auto [n, s] = tasks[t];
    const std::uint64_t seed = derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(n)), s);
    seeds[t] = seed;
    const Dataset sample = target_region.subset(fewshot_sample(target_region, tune_country, n, seed));

    classifier::FinetuneConfig ft = cfg.finetune;
    ft.seed = seed;
    // One early-stopping split shared by all three models.
    const Split split = outcome_stratified_holdout(sample, ft.val_fraction, derive_seed(seed, 14));
    const Dataset train = sample.subset(split.train);
    const Dataset val = sample.subset(split.test);

    const auto member_seeds = classifier::default_ensemble_seeds(seed, cfg.ensemble_size);
    const classifier::Ensemble ensemble = classifier::train_ensemble(ckpt, train, val, ft, member_seeds);
    const classifier::ClassifierModel cold = baselines::train_cold_mlp(train, val, ft);
    baselines::GbdtConfig gb = cfg.gbdt;
    gb.seed = seed;
    const baselines::GbdtModel gbdt = baselines::train_gbdt(train, &val, gb);

    aucs[t] = {evaluate_auc(predictor_of(ensemble), eval_set), evaluate_auc(predictor_of(cold), eval_set),
               evaluate_auc(predictor_of(gbdt), eval_set)};
  });

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    for (std::size_t m = 0; m < kCurveModels.size(); ++m) {
      curve.points.push_back({kCurveModels[m], tasks[t].n, tasks[t].seed_index, seeds[t], aucs[t][m]});
    }
  }
  for (int n : curve.sizes) {
    std::array<std::vector<double>, 3> by_model;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      if (tasks[t].n != n) continue;
      for (std::size_t m = 0; m < 3; ++m) by_model[m].push_back(aucs[t][m]);
    }
    for (std::size_t m = 0; m < 3; ++m) {
      curve.summary.push_back({kCurveModels[m], n, metrics::mean(by_model[m]), metrics::stddev(by_model[m])});
    }
    for (std::size_t m = 1; m < 3; ++m) {
      FewShotComparison c;
      c.baseline = kCurveModels[m];
      c.n = n;
      c.seeds = static_cast<int>(by_model[0].size());
      for (std::size_t s = 0; s < by_model[0].size(); ++s) {
        c.wins += by_model[0][s] > by_model[m][s] ? 1 : 0;
      }
      c.gain = metrics::mean(by_model[0]) - metrics::mean(by_model[m]);
      c.relative_gain = metrics::mean(by_model[0]) / metrics::mean(by_model[m]) - 1.0;
      if (by_model[0].size() >= 2) c.ttest = stats::paired_ttest(by_model[0], by_model[m]);
      curve.comparisons.push_back(c);
    }
  }
  return curve;
}

std::string curve_csv(const FewShotCurve& curve) {
  std::ostringstream out;
  out << "model,n,seed,auc\n";
  for (const auto& p : curve.points) {
    out << p.model << ',' << p.n << ',' << p.seed_index << ',' << format_double(p.auc) << '\n';
  }
  return out.str();
}

json to_json(const FewShotCurve& curve) {
  json summary = json::array();
  for (const auto& s : curve.summary) {
    summary.push_back({{"model", s.model}, {"n", s.n}, {"mean_auc", s.mean}, {"sd_auc", s.sd}});
  }
  json comparisons = json::array();
  for (const auto& c : curve.comparisons) {
    comparisons.push_back({{"model", kPretrainedModel},
                           {"baseline", c.baseline},
                           {"n", c.n},
                           {"wins", c.wins},
                           {"seeds", c.seeds},
                           {"gain_absolute", c.gain},
                           {"gain_relative", c.relative_gain},
                           {"t", c.ttest.t},
                           {"p", c.ttest.p},
                           {"degenerate", c.ttest.degenerate}});
  }
  json points = json::array();
  for (const auto& p : curve.points) {
    points.push_back({{"model", p.model}, {"n", p.n}, {"seed_index", p.seed_index}, {"seed", p.seed}, {"auc", p.auc}});
  }
  return {{"tune_country", curve.tune_country},
          {"eval_countries", curve.eval_countries},
          {"sizes", curve.sizes},
          {"summary", std::move(summary)},
          {"comparisons", std::move(comparisons)},
          {"points", std::move(points)},
          {"warnings", curve.warnings}};
}

// ---- sample complexity ----

ComplexityResult sample_complexity_curve(const tmae::EncoderCheckpoint& ckpt, const Dataset& target,
                                         const ComplexityConfig& cfg) {
  if (cfg.n_seeds < 1) throw InvalidArgument("n_seeds must be >= 1");
  if (cfg.sizes.size() < 2) throw InvalidArgument("sample complexity needs at least two sizes");
  const Split split = stratified_holdout(target, cfg.test_fraction, derive_seed(cfg.seed, 0));
  const Dataset pool = target.subset(split.train);
  const Dataset test = target.subset(split.test);
  if (!test.has_both_classes()) throw UndefinedMetric("sample-complexity test set holds a single class");

  ComplexityResult result;
  result.reference_n = static_cast<int>(pool.rows());
  std::vector<int> sizes = cfg.sizes;
  for (int n : sizes) {
    if (n < 2 || n > result.reference_n) {
      throw InvalidArgument("size " + std::to_string(n) + " outside [2, " + std::to_string(result.reference_n) + "]");
    }
  }
  sizes.push_back(result.reference_n);

  classifier::FinetuneConfig ft = cfg.finetune;
  ft.freeze_encoder = true;
  const auto n_seeds = static_cast<std::size_t>(cfg.n_seeds);
  std::vector<double> aucs(sizes.size() * n_seeds);
  parallel_for(aucs.size(), cfg.jobs, [&](std::size_t t) {
    const int n = sizes[t / n_seeds];
    const std::size_t s = t % n_seeds;
    const std::uint64_t seed = derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(n)), s);
    Rng rng(seed);
    std::vector<std::size_t> idx(pool.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(idx));
    idx.resize(static_cast<std::size_t>(n));
    std::sort(idx.begin(), idx.end());
    classifier::FinetuneConfig run = ft;
    run.seed = seed;
    const auto model = classifier::finetune(classifier::init_from_encoder(ckpt, run), pool.subset(idx), run);
    aucs[t] = evaluate_auc(predictor_of(model), test);
  });

  auto slice = [&](std::size_t k) {
    return std::vector<double>(aucs.begin() + static_cast<std::ptrdiff_t>(k * n_seeds),
                               aucs.begin() + static_cast<std::ptrdiff_t>((k + 1) * n_seeds));
  };
  result.reference_auc = metrics::mean(slice(sizes.size() - 1));
  std::vector<double> deficits, inv_sqrt;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    ComplexityPoint p;
    p.n = sizes[k];
    p.aucs = slice(k);
    p.mean_auc = metrics::mean(p.aucs);
    p.sd_auc = metrics::stddev(p.aucs);
    p.deficit = result.reference_auc - p.mean_auc;
    deficits.push_back(p.deficit);
    inv_sqrt.push_back(1.0 / std::sqrt(static_cast<double>(p.n)));
    result.points.push_back(std::move(p));
  }
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < deficits.size(); ++k) {
    num += deficits[k] * inv_sqrt[k];
    den += inv_sqrt[k] * inv_sqrt[k];
  }
  result.c = num / den;
  result.correlation = metrics::pearson(deficits, inv_sqrt);
  return result;
}

json to_json(const ComplexityResult& result) {
  json points = json::array();
  for (const auto& p : result.points) {
    points.push_back({{"n", p.n},
                      {"mean_auc", p.mean_auc},
                      {"sd_auc", p.sd_auc},
                      {"deficit", p.deficit},
                      {"fitted_deficit", result.c / std::sqrt(static_cast<double>(p.n))},
                      {"aucs", p.aucs}});
  }
  return {{"reference_n", result.reference_n},
          {"reference_auc", result.reference_auc},
          {"c", result.c},
          {"correlation", result.correlation},
          {"points", std::move(points)}};
}

}  // namespace devenc::eval
