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

#include <cmath>

#include <doctest.h>

#include "devenc/baselines.hpp"
#include "devenc/error.hpp"
#include "devenc/metrics.hpp"
#include "devenc/synth.hpp"
#include "test_support.hpp"

using namespace devenc;
using namespace devenc::baselines;
using devenc::testing::gaussian;
using devenc::testing::make_dataset;

namespace {

// Second-order objective of one leaf with its optimal value.
double leaf_objective(double g, double h, double lambda) { return -0.5 * g * g / (h + lambda); }

// XOR-style target on two uniform columns plus two noise columns.
Dataset xor_data(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, 4);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < 4; ++j) x(i, j) = rng.uniform();
    y[i] = ((x(i, 0) > 0.5) != (x(i, 1) > 0.5)) ? 1.0 : 0.0;
  }
  return make_dataset(x, y);
}

double auc_of(const Vector& p, const Dataset& d) { return metrics::auc(as_span(p), as_span(d.outcome)); }

}  // namespace

TEST_CASE("split gain is twice the second-order objective reduction") {
  for (auto [gl, hl, gr, hr, lam] : std::vector<std::array<double, 5>>{
           {1.5, 2.0, -3.0, 4.0, 0.0}, {0.2, 1.0, 0.2, 1.0, 1.0}, {-5, 3, 2, 7, 0.5}}) {
    const double reduction =
        leaf_objective(gl + gr, hl + hr, lam) - leaf_objective(gl, hl, lam) - leaf_objective(gr, hr, lam);
    CHECK(split_gain(gl, hl, gr, hr, lam) == doctest::Approx(2.0 * reduction));
  }
}

TEST_CASE("best_split equals an exhaustive search") {
  Rng rng(21);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 40 + rng.below(60), f = 3;
    std::vector<std::vector<std::uint16_t>> binned(f, std::vector<std::uint16_t>(n));
    std::vector<int> bins{4, 7, 2};
    std::vector<double> g(n), h(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < f; ++j) binned[j][i] = static_cast<std::uint16_t>(rng.below(bins[j]));
      g[i] = rng.normal();
      h[i] = 0.05 + rng.uniform() * 0.2;
    }
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i)
      if (rng.bernoulli(0.8)) rows.push_back(i);
    const int min_leaf = 5;
    double best_gain = -1e300;
    int best_f = -1, best_t = -1;
    for (std::size_t j = 0; j < f; ++j) {
      for (int t = 0; t + 1 < bins[j]; ++t) {
        double gl = 0, hl = 0, gr = 0, hr = 0;
        int nl = 0, nr = 0;
        for (std::size_t i : rows) {
          if (binned[j][i] <= t) {
            gl += g[i];
            hl += h[i];
            ++nl;
          } else {
            gr += g[i];
            hr += h[i];
            ++nr;
          }
        }
        if (nl < min_leaf || nr < min_leaf) continue;
        const double gain = split_gain(gl, hl, gr, hr, 0.1);
        if (gain > best_gain) {
          best_gain = gain;
          best_f = static_cast<int>(j);
          best_t = t;
        }
      }
    }
    const SplitCandidate s = best_split(binned, rows, g, h, bins, min_leaf, 0.1);
    CHECK(s.feature == best_f);
    CHECK(s.threshold == best_t);
    if (best_f >= 0) CHECK(s.gain == doctest::Approx(best_gain).epsilon(1e-9));
  }
}

TEST_CASE("bin edges sit between distinct values and bin_of counts edges below") {
  const std::vector<double> col{3, 1, 2, 2, 1, 3};
  const auto edges = compute_bin_edges(col, 64);
  REQUIRE(edges.size() == 2);
  CHECK(edges[0] == 1.5);
  CHECK(edges[1] == 2.5);
  CHECK(bin_of(1.0, edges) == 0);
  CHECK(bin_of(2.0, edges) == 1);
  CHECK(bin_of(9.0, edges) == 2);
  std::vector<double> many(1000);
  for (std::size_t i = 0; i < many.size(); ++i) many[i] = static_cast<double>(i);
  CHECK(compute_bin_edges(many, 16).size() <= 15);
}

TEST_CASE("gbdt fits an interaction that a linear model cannot") {
  const Dataset train = xor_data(2000, 1);
  const Dataset test = xor_data(1000, 2);
  GbdtConfig cfg;
  const GbdtModel m = train_gbdt(train, nullptr, cfg);
  CHECK(auc_of(predict_gbdt(m, test.features), test) > 0.95);
  const auto lr = train_logreg(train, {});
  CHECK(auc_of(predict_proba(lr, test.features), test) < 0.65);
  CHECK(m.trees.size() == 100);
  for (const auto& t : m.trees) CHECK(t.depth() <= cfg.max_depth);
  for (std::size_t i = 1; i < m.train_loss.size(); ++i) CHECK(m.train_loss[i] <= m.train_loss[i - 1] + 1e-12);
}

TEST_CASE("gbdt early stopping truncates to the best round") {
  const Dataset train = xor_data(400, 3);
  const Dataset val = xor_data(400, 4);
  GbdtConfig cfg;
  cfg.n_estimators = 300;
  cfg.learning_rate = 0.3;
  const GbdtModel m = train_gbdt(train, &val, cfg);
  CHECK(m.best_iteration >= 1);
  CHECK(static_cast<int>(m.trees.size()) == m.best_iteration);
  CHECK(m.trees.size() < 300);
}

TEST_CASE("gbdt degenerate inputs") {
  Rng rng(2);
  Dataset one = make_dataset(gaussian(100, 2, rng), Vector::Zero(100));
  const GbdtModel c = train_gbdt(one, nullptr, {});
  CHECK(c.constant);
  CHECK(!c.warnings.empty());
  CHECK(predict_gbdt(c, one.features).maxCoeff() < 0.01);
  Dataset tiny = make_dataset(gaussian(30, 2, rng), Vector::LinSpaced(30, 0, 1).array().round());
  CHECK_THROWS_AS(train_gbdt(tiny, nullptr, {}), InvalidArgument);
}

TEST_CASE("gbdt json round trip predicts identically") {
  const Dataset d = xor_data(500, 5);
  GbdtConfig cfg;
  cfg.n_estimators = 10;
  const GbdtModel m = train_gbdt(d, nullptr, cfg);
  const GbdtModel back = gbdt_from_json(gbdt_to_json(m));
  CHECK(predict_gbdt(back, d.features) == predict_gbdt(m, d.features));
  nlohmann::json bad = gbdt_to_json(m);
  bad["trees"][0][0]["left"] = 999;
  CHECK_THROWS(gbdt_from_json(bad));
}

TEST_CASE("logistic regression matches a Newton oracle") {
  Rng rng(8);
  const Eigen::Index n = 200;
  Matrix x = gaussian(n, 1, rng);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = rng.bernoulli(1.0 / (1.0 + std::exp(-(1.5 * x(i, 0) - 0.3)))) ? 1 : 0;
  const double l2 = 0.01;
  // Newton iterations on (w, b).
  double w = 0, b = 0;
  for (int it = 0; it < 50; ++it) {
    double gw = l2 * w, gb = 0, hww = l2, hwb = 0, hbb = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = 1.0 / (1.0 + std::exp(-(w * x(i, 0) + b)));
      const double r = (p - y[i]) / n, s = p * (1 - p) / n;
      gw += r * x(i, 0);
      gb += r;
      hww += s * x(i, 0) * x(i, 0);
      hwb += s * x(i, 0);
      hbb += s;
    }
    const double det = hww * hbb - hwb * hwb;
    w -= (hbb * gw - hwb * gb) / det;
    b -= (hww * gb - hwb * gw) / det;
  }
  LogregConfig cfg;
  cfg.l2 = l2;
  cfg.tolerance = 1e-8;
  const LogisticModel m = fit_logistic(x, y, cfg);
  CHECK(m.converged);
  CHECK(m.weights[0] == doctest::Approx(w).epsilon(1e-6));
  CHECK(m.bias == doctest::Approx(b).epsilon(1e-6));
}

TEST_CASE("logistic objective gradient matches finite differences") {
  Rng rng(9);
  const Matrix x = gaussian(50, 3, rng);
  Vector y(50);
  for (Eigen::Index i = 0; i < 50; ++i) y[i] = i % 3 == 0;
  Vector w(3);
  w << 0.3, -0.2, 0.1;
  const auto obj = logistic_objective(x, y, w, 0.4, 0.05);
  for (Eigen::Index j = 0; j < 3; ++j) {
    Vector wp = w, wm = w;
    wp[j] += 1e-6;
    wm[j] -= 1e-6;
    const double num = (logistic_objective(x, y, wp, 0.4, 0.05).value - logistic_objective(x, y, wm, 0.4, 0.05).value) / 2e-6;
    CHECK(obj.grad_weights[j] == doctest::Approx(num).epsilon(1e-6));
  }
  const double numb =
      (logistic_objective(x, y, w, 0.4 + 1e-6, 0.05).value - logistic_objective(x, y, w, 0.4 - 1e-6, 0.05).value) / 2e-6;
  CHECK(obj.grad_bias == doctest::Approx(numb).epsilon(1e-6));
}

TEST_CASE("cold-start mlp learns the synthetic outcome") {
  SynthConfig s;
  s.n_countries = 2;
  s.rows_per_country = 400;
  const Dataset d = synth_generate(s);
  const Dataset train = d.subset(d.rows_of_country("C01"));
  const Dataset test = d.subset(d.rows_of_country("C02"));
  classifier::FinetuneConfig cfg;
  cfg.max_epochs = 30;
  const auto m = train_cold_mlp(train, cfg);
  CHECK(m.provenance.kind == "cold_start");
  CHECK(m.network.layer_dims == std::vector<int>{11, kColdMlpHidden[0], kColdMlpHidden[1], 1});
  CHECK(auc_of(classifier::predict_proba(m, test.features), test) > 0.7);
}
