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

#include <doctest.h>

#include "devenc/error.hpp"
#include "devenc/eval.hpp"
#include "devenc/synth.hpp"
#include "test_support.hpp"

using namespace devenc;
using namespace devenc::eval;
using devenc::testing::gaussian;
using devenc::testing::make_dataset;

namespace {

Trainer logreg_trainer() {
  return [](const Dataset& train, std::uint64_t) -> Predictor {
    const auto clf = baselines::train_logreg(train, {});
    return [clf](const Matrix& rows) { return baselines::predict_proba(clf, rows); };
  };
}

Dataset small_benchmark(int countries = 4, int rows = 150) {
  SynthConfig s;
  s.n_countries = countries;
  s.rows_per_country = rows;
  return synth_generate(s);
}

}  // namespace

TEST_CASE("country-stratified resample keeps every country's size") {
  const Dataset d = small_benchmark(3, 120);
  Rng rng(1);
  const auto idx = country_stratified_resample(d, rng);
  CHECK(idx.size() == d.rows());
  for (const auto& c : d.countries()) {
    CHECK(std::count_if(idx.begin(), idx.end(), [&](std::size_t i) { return d.country[i] == c; }) == 120);
  }
}

TEST_CASE("bootstrap percentile interval covers a Bernoulli proportion") {
  Rng rng(77);
  int covered = 0;
  const int sims = 100;
  for (int s = 0; s < sims; ++s) {
    Vector y(200);
    for (Eigen::Index i = 0; i < 200; ++i) y[i] = rng.bernoulli(0.3) ? 1.0 : 0.0;
    const Dataset d = make_dataset(Matrix::Zero(200, 1), y);
    BootstrapConfig cfg;
    cfg.n_resamples = 300;
    cfg.seed = static_cast<std::uint64_t>(s);
    const EvalReport r = bootstrap_ci([](const Dataset& t, std::uint64_t) { return t.outcome.mean(); }, d, cfg, "mean");
    CHECK(r.point == doctest::Approx(y.mean()));
    CHECK(r.ci_low <= r.point);
    CHECK(r.ci_high >= r.point);
    covered += r.ci_low <= 0.3 && 0.3 <= r.ci_high;
  }
  CHECK(covered >= 88);
  CHECK(covered <= 99);
}

TEST_CASE("bootstrap output does not depend on the worker count") {
  const Dataset d = small_benchmark(2, 100);
  BootstrapConfig cfg;
  cfg.n_resamples = 20;
  auto closure = [](const Dataset& t, std::uint64_t seed) { return t.outcome.mean() + 1e-9 * static_cast<double>(seed % 7); };
  const EvalReport a = bootstrap_ci(closure, d, cfg);
  cfg.jobs = 3;
  const EvalReport b = bootstrap_ci(closure, d, cfg);
  CHECK(a.resample_values == b.resample_values);
  CHECK(to_json(a).dump() == to_json(b).dump());
}

TEST_CASE("leave-one-country-out has disjoint folds and reports per-country AUC") {
  const Dataset d = small_benchmark(4, 150);
  const LocoResult r = loco_run(logreg_trainer(), d, 42, 2);
  REQUIRE(r.folds.size() == 4);
  for (const auto& f : r.folds) {
    CHECK(f.overlap == 0);
    CHECK(f.n_test == 150);
    CHECK(f.n_train == 450);
    CHECK(f.defined);
    CHECK(f.auc > 0.6);
  }
  const EvalReport rep = r.report();
  CHECK(rep.point == doctest::Approx(r.mean_auc()));
  CHECK(rep.per_group.size() == 4);
}

TEST_CASE("leave-one-country-out rejects shared row ids and flags single-class countries") {
  Dataset d = small_benchmark(3, 100);
  Dataset single = d;
  for (std::size_t i : single.rows_of_country("C02")) single.outcome[static_cast<Eigen::Index>(i)] = 1.0;
  const LocoResult r = loco_run(logreg_trainer(), single, 1);
  CHECK_FALSE(r.folds[1].defined);
  CHECK(!r.folds[1].note.empty());
  d.row_id[d.rows_of_country("C03").front()] = d.row_id[0];
  CHECK_THROWS_AS(loco_run(logreg_trainer(), d, 1), DataError);
}

TEST_CASE("permutation importance separates a sole predictor from an independent column") {
  Rng rng(5);
  const Matrix x = gaussian(2000, 2, rng);
  Vector y(2000);
  for (Eigen::Index i = 0; i < 2000; ++i) y[i] = rng.bernoulli(1.0 / (1.0 + std::exp(-3.0 * x(i, 0)))) ? 1 : 0;
  const Dataset d = make_dataset(x, y);
  const auto clf = baselines::train_logreg(d, {});
  const Predictor predict = [clf](const Matrix& rows) { return baselines::predict_proba(clf, rows); };
  const ImportanceResult r = permutation_importance(predict, d, 50, 3);
  CHECK(r.rows.front().feature == "f0");
  CHECK(r.row("f0").importance > 0.2);
  CHECK(r.row("f1").ci_low <= 0.0);
  CHECK(r.row("f1").ci_high >= 0.0);
  const ImportanceResult again = permutation_importance(predict, d, 50, 3, 2);
  CHECK(to_json(again).dump() == to_json(r).dump());
}

TEST_CASE("calibration of a perfectly calibrated predictor") {
  Rng rng(12);
  const Eigen::Index n = 100000;
  Matrix x(n, 1);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform();
    y[i] = rng.bernoulli(x(i, 0)) ? 1 : 0;
  }
  const Predictor identity = [](const Matrix& rows) { return Vector(rows.col(0)); };
  const CalibrationResult c = calibration_report(identity, make_dataset(x, y));
  CHECK(c.ece < 0.01);
  CHECK(c.brier == doctest::Approx(1.0 / 6.0).epsilon(0.02));
  CHECK(c.bins.size() == 10);
}

TEST_CASE("equity audit follows quintile-graded label noise") {
  SynthConfig s;
  s.n_countries = 2;
  s.rows_per_country = 3000;
  s.quintile_label_noise = std::array<double, 5>{0.25, 0.18, 0.12, 0.06, 0.0};
  const Dataset d = synth_generate(s);
  const auto clf = baselines::train_logreg(d, {});
  const Predictor predict = [clf](const Matrix& rows) { return baselines::predict_proba(clf, rows); };
  const EquityResult e = equity_audit(predict, d);
  REQUIRE(e.rows.size() == 5);
  CHECK(e.ratio_defined);
  CHECK(e.ratio > 1.05);
  CHECK(e.rows[4].auc > e.rows[0].auc);
}

TEST_CASE("proxy divergence is near zero for one distribution and large for separated ones") {
  Rng rng(3);
  const Matrix a = gaussian(2000, 3, rng);
  const Matrix b = gaussian(2000, 3, rng);
  CHECK(proxy_divergence(a, b, 1).d_hat < 0.1);
  Matrix shifted = gaussian(1500, 3, rng);
  shifted.array() += 1.5;
  const DivergenceResult r = proxy_divergence(a, shifted, 1);
  CHECK(r.d_hat > 1.0);
  CHECK(r.n_per_domain == 1500);
  CHECK(r.d_hat <= 2.0);
}

TEST_CASE("few-shot curve structure on a tiny run") {
  const Dataset d = small_benchmark(4, 150);
  tmae::PretrainConfig pc;
  pc.epochs = 2;
  pc.hidden_dims = {16, 8};
  const Dataset source = d.subset(d.rows_of_countries(std::vector<std::string>{"C01", "C02"}));
  const auto ckpt = tmae::pretrain(source.features, source.feature_names, pc);
  const Dataset region = d.subset(d.rows_of_countries(std::vector<std::string>{"C03", "C04"}));
  FewShotConfig cfg;
  cfg.sizes = {40, 80, 500};
  cfg.n_seeds = 2;
  cfg.ensemble_size = 2;
  cfg.finetune.max_epochs = 5;
  cfg.gbdt.min_samples_leaf = 5;
  const FewShotCurve c = fewshot_curve(ckpt, region, "C03", cfg);
  CHECK(c.sizes == std::vector<int>{40, 80});
  CHECK(c.warnings.size() == 1);
  CHECK(c.eval_countries == std::vector<std::string>{"C04"});
  CHECK(c.points.size() == 2 * 2 * 3);
  CHECK(c.comparison(kGbdtModel, 40).seeds == 2);
  const std::string csv = curve_csv(c);
  CHECK(csv.rfind("model,n,seed,auc\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
  cfg.jobs = 2;
  CHECK(to_json(fewshot_curve(ckpt, region, "C03", cfg)).dump() == to_json(c).dump());
  CHECK_THROWS_AS(fewshot_curve(ckpt, region, "C01", cfg), InvalidArgument);
}

TEST_CASE("sample complexity fit on a tiny run") {
  const Dataset d = small_benchmark(2, 300);
  tmae::PretrainConfig pc;
  pc.epochs = 2;
  pc.hidden_dims = {16, 8};
  const auto ckpt = tmae::pretrain(d.features, d.feature_names, pc);
  ComplexityConfig cfg;
  cfg.sizes = {20, 40, 80};
  cfg.n_seeds = 2;
  cfg.finetune.max_epochs = 5;
  const ComplexityResult r = sample_complexity_curve(ckpt, d, cfg);
  CHECK(r.reference_n == 300);
  CHECK(r.points.size() == 3);
  // c is the least-squares slope through the origin
  double num = 0, den = 0;
  for (const auto& p : r.points) {
    num += p.deficit / std::sqrt(p.n);
    den += 1.0 / p.n;
  }
  CHECK(r.c == doctest::Approx(num / den));
  cfg.sizes = {20, 400};
  CHECK_THROWS_AS(sample_complexity_curve(ckpt, d, cfg), InvalidArgument);
}

TEST_CASE("report json and text carry the metric and interval") {
  EvalReport r;
  r.metric = "auc";
  r.point = 0.8;
  r.ci_low = 0.75;
  r.ci_high = 0.85;
  r.n_resamples = 10;
  const auto j = to_json(r);
  CHECK(j["metric"] == "auc");
  CHECK(j["ci_low"] == 0.75);
  CHECK(to_text(r).find("0.8") != std::string::npos);
}
