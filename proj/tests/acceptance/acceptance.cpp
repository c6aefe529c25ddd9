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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failures, so ctest fails when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "devenc/baselines.hpp"
#include "devenc/classifier.hpp"
#include "devenc/error.hpp"
#include "devenc/eval.hpp"
#include "devenc/hpo.hpp"
#include "devenc/metrics.hpp"
#include "devenc/nn.hpp"
#include "devenc/serialize.hpp"
#include "devenc/synth.hpp"
#include "devenc/tmae.hpp"

using namespace devenc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Matrix gaussian(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

Dataset single_country(const Matrix& x, const Vector& y) {
  Dataset d;
  for (Eigen::Index j = 0; j < x.cols(); ++j) d.feature_names.push_back("x" + std::to_string(j));
  d.features = x;
  d.outcome = y;
  const auto n = static_cast<std::size_t>(x.rows());
  d.country.assign(n, "A");
  d.region.assign(n, "R1");
  d.wealth_quintile.assign(n, 1);
  d.row_id.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.row_id[i] = static_cast<std::int64_t>(i);
  return d;
}

std::vector<std::string> country_range(int first, int last) {
  std::vector<std::string> out;
  for (int i = first; i <= last; ++i) out.push_back(SynthConfig{}.country_code(i - 1));
  return out;
}

// ---- 1 ----

// Extended-precision forward pass and half squared error, written out with
// plain loops so the oracle shares no code with the library.
struct WideNet {
  std::vector<int> dims;
  std::vector<std::vector<long double>> w;  // row-major, out x in
  std::vector<std::vector<long double>> b;
};

long double wide_loss(const WideNet& net, const Matrix& x, const Matrix& t) {
  long double total = 0.0L;
  const std::size_t layers = net.w.size();
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    std::vector<long double> h(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) h[static_cast<std::size_t>(j)] = x(r, j);
    for (std::size_t l = 0; l < layers; ++l) {
      const auto in = static_cast<std::size_t>(net.dims[l]);
      const auto out = static_cast<std::size_t>(net.dims[l + 1]);
      std::vector<long double> next(out);
      for (std::size_t o = 0; o < out; ++o) {
        long double z = net.b[l][o];
        for (std::size_t k = 0; k < in; ++k) z += net.w[l][o * in + k] * h[k];
        next[o] = (l + 1 < layers && z < 0.0L) ? 0.0L : z;
      }
      h = std::move(next);
    }
    for (std::size_t o = 0; o < h.size(); ++o) {
      const long double d = h[o] - t(r, static_cast<Eigen::Index>(o));
      total += 0.5L * d * d;
    }
  }
  return total / static_cast<long double>(x.rows());
}

Outcome gradient_correctness() {
  Rng rng(2024);
  double worst = 0.0;
  std::size_t coords = 0;
  for (int arch = 0; arch < 20; ++arch) {
    const int layers = 1 + static_cast<int>(rng.below(4));
    std::vector<int> dims;
    for (int l = 0; l <= layers; ++l) dims.push_back(1 + static_cast<int>(rng.below(64)));
    nn::MlpParams p = nn::init_mlp(dims, derive_seed(7, static_cast<std::uint64_t>(arch)));
    // Zero biases behind a dead ReLU give pre-activations of exactly 0, where
    // the network is not differentiable; random biases avoid those points.
    for (auto& b : p.biases)
      for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = 0.1 * rng.normal();
    const Matrix x = gaussian(8, dims.front(), rng);
    const Matrix t = gaussian(8, dims.back(), rng);
    Rng unused(0);
    const auto trace = nn::forward(p, x, 0.0, nn::Mode::kEval, unused);
    const auto g = nn::backward(p, trace, (trace.output() - t) / 8.0);
    WideNet net{dims, {}, {}};
    for (std::size_t l = 0; l < p.num_layers(); ++l) {
      net.w.emplace_back(p.weights[l].data(), p.weights[l].data() + p.weights[l].size());
      net.b.emplace_back(p.biases[l].data(), p.biases[l].data() + p.biases[l].size());
    }
    const long double eps = 1e-6L;
    auto check = [&](long double& slot, double analytic) {
      const long double keep = slot;
      slot = keep + eps;
      const long double up = wide_loss(net, x, t);
      slot = keep - eps;
      const long double down = wide_loss(net, x, t);
      slot = keep;
      const auto numeric = static_cast<double>((up - down) / (2.0L * eps));
      worst = std::max(worst, std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-6}));
      ++coords;
    };
    for (std::size_t l = 0; l < p.num_layers(); ++l) {
      for (std::size_t i = 0; i < net.w[l].size(); ++i) check(net.w[l][i], g.weights[l].data()[i]);
      for (std::size_t i = 0; i < net.b[l].size(); ++i) check(net.b[l][i], g.biases[l][static_cast<Eigen::Index>(i)]);
    }
  }
  return {worst < 1e-4, "max relative error " + fmt("%.3g", worst) + " over " + std::to_string(coords) +
                            " coordinates of 20 architectures (extended-precision central differences)"};
}

// ---- 2 ----

Outcome auc_oracle() {
  Rng rng(99);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 2 + rng.below(200);
    std::vector<double> s(n), y(n);
    const std::uint64_t levels = 2 + rng.below(20);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(levels));
      y[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    y[0] = 1.0;
    y[1] = 0.0;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (y[i] != 1.0 || y[j] != 0.0) continue;
        den += 1.0;
        num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
    }
    worst = std::max(worst, std::abs(metrics::auc(s, y) - num / den));
  }
  return {worst <= 1e-12, "max |fast - pair count| " + fmt("%.3g", worst) + " over 1000 tied instances"};
}

// ---- 3 ----

Outcome tmae_structure() {
  const int d = 11;
  const double loading = 0.95;
  auto make = [&](Eigen::Index n, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double f = rng.normal();
      for (int j = 0; j < d; ++j) x(i, j) = 3.0 * j + (1.0 + 0.1 * j) * (loading * f + std::sqrt(1 - loading * loading) * rng.normal());
    }
    return x;
  };
  const Matrix train = make(5000, 1);
  const Matrix test = make(2000, 2);
  double min_corr = 1.0;
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      const Vector ca = train.col(a), cb = train.col(b);
      min_corr = std::min(min_corr, metrics::pearson(as_span(ca), as_span(cb)));
    }
  }
  std::vector<std::string> names;
  for (int j = 0; j < d; ++j) names.push_back("x" + std::to_string(j));
  tmae::PretrainConfig cfg;
  cfg.epochs = 30;
  const auto ckpt = tmae::pretrain(train, names, cfg);
  Rng rng(3);
  Mask mask = Mask::Constant(test.rows(), d, false);
  for (Eigen::Index i = 0; i < test.rows(); ++i) {
    for (int j : tmae::sample_mask(d, cfg.mask_ratio, rng)) mask(i, j) = true;
  }
  // Column-mean predictor: the training mean, i.e. zero after standardizing.
  const Matrix z = ckpt.standardizer.transform(test);
  double baseline = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (int j = 0; j < d; ++j)
      if (mask(i, j)) baseline += z(i, j) * z(i, j);
  baseline /= static_cast<double>(mask.count());
  const double mse = tmae::reconstruct(ckpt, test, mask).masked_mse;
  return {min_corr >= 0.8 && mse <= 0.8 * baseline,
          "held-out masked MSE " + fmt("%.4f", mse) + " vs column-mean " + fmt("%.4f", baseline) + " (ratio " +
              fmt("%.3f", mse / baseline) + "), min pairwise corr " + fmt("%.3f", min_corr)};
}

// ---- 4, 5: shared benchmark ----

struct Benchmark {
  Dataset data;
  tmae::EncoderCheckpoint ckpt;
  eval::FewShotCurve curve;
  bool ready = false;
};

Benchmark& benchmark() {
  static Benchmark b;
  if (b.ready) return b;
  SynthConfig cfg;  // 12 countries x 2000 rows, shift 0.5, seed 42
  b.data = synth_generate(cfg);
  const Dataset source = b.data.subset(b.data.rows_of_countries(country_range(1, 10)));
  tmae::PretrainConfig pc;
  pc.seed = 42;
  b.ckpt = tmae::pretrain(source.features, source.feature_names, pc);
  const Dataset region = b.data.subset(b.data.rows_of_countries(country_range(11, 12)));
  eval::FewShotConfig fc;
  fc.sizes = {50, 100, 200, 500, 2000};
  fc.n_seeds = 10;
  fc.seed = 42;
  b.curve = eval::fewshot_curve(b.ckpt, region, "C11", fc);
  b.ready = true;
  return b;
}

Outcome transfer_gain() {
  const auto& c = benchmark().curve;
  const auto& vs_mlp = c.comparison(eval::kColdMlpModel, 50);
  const double gap = c.mean_auc(eval::kPretrainedModel, 50) - c.mean_auc(eval::kGbdtModel, 50);
  return {vs_mlp.wins >= 8 && gap >= 0.02,
          "N=50: beats cold MLP in " + std::to_string(vs_mlp.wins) + "/" + std::to_string(vs_mlp.seeds) +
              " seeds; pretrained " + fmt("%.4f", c.mean_auc(eval::kPretrainedModel, 50)) + " vs MLP " +
              fmt("%.4f", c.mean_auc(eval::kColdMlpModel, 50)) + " vs GBDT " +
              fmt("%.4f", c.mean_auc(eval::kGbdtModel, 50)) + " (gap " + fmt("%+.4f", gap) + ")"};
}

Outcome fewshot_shape() {
  const auto& c = benchmark().curve;
  bool ok = true;
  std::string detail;
  for (int n : c.sizes) {
    const double gap = c.mean_auc(eval::kPretrainedModel, n) - c.mean_auc(eval::kGbdtModel, n);
    if (n <= 200 && gap < 0.0) ok = false;
    detail += "N=" + std::to_string(n) + " gap " + fmt("%+.4f", gap) + "; ";
  }
  const double g50 = c.mean_auc(eval::kPretrainedModel, 50) - c.mean_auc(eval::kGbdtModel, 50);
  const double g2000 = c.mean_auc(eval::kPretrainedModel, 2000) - c.mean_auc(eval::kGbdtModel, 2000);
  ok = ok && g50 > g2000;
  return {ok, detail + "converging: " + (g50 > g2000 ? "yes" : "no")};
}

// ---- 6 ----

Outcome sample_complexity() {
  auto& b = benchmark();
  const Dataset target = b.data.subset(b.data.rows_of_countries(country_range(11, 12)));
  eval::ComplexityConfig cfg;  // sizes 50..800, 10 seeds
  const auto r = eval::sample_complexity_curve(b.ckpt, target, cfg);
  std::string detail;
  for (const auto& p : r.points) detail += std::to_string(p.n) + ":" + fmt("%.4f", p.deficit) + " ";
  return {r.correlation > 0.9, "deficits " + detail + "c=" + fmt("%.3f", r.c) + " correlation " +
                                   fmt("%.4f", r.correlation) + " (reference n=" + std::to_string(r.reference_n) + ")"};
}

// ---- 7 ----

Outcome divergence_monotone() {
  const std::vector<double> deltas{0.0, 0.25, 0.5, 1.0};
  std::vector<double> d_hat;
  for (double delta : deltas) {
    SynthConfig cfg;
    cfg.country_shift_scale = delta;
    const Dataset data = synth_generate(cfg);
    const Dataset src = data.subset(data.rows_of_countries(country_range(1, 10)));
    const Dataset tgt = data.subset(data.rows_of_countries(country_range(11, 12)));
    d_hat.push_back(eval::proxy_divergence(src.features, tgt.features, 42).d_hat);
  }
  bool ok = d_hat[0] < 0.1;
  std::string detail;
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    detail += "d(" + fmt("%.2f", deltas[k]) + ")=" + fmt("%.3f", d_hat[k]) + " ";
    if (k > 0 && d_hat[k] - d_hat[k - 1] <= -0.05) ok = false;
  }
  bool strict = true;
  for (std::size_t k = 1; k < d_hat.size(); ++k) strict = strict && d_hat[k] > d_hat[k - 1];
  return {ok, detail + (strict ? "strictly increasing" : "not strictly increasing")};
}

// ---- 8 ----

Outcome bootstrap_coverage() {
  Rng rng(8);
  int covered = 0;
  const int sims = 500;
  for (int s = 0; s < sims; ++s) {
    Vector y(200);
    for (Eigen::Index i = 0; i < 200; ++i) y[i] = rng.bernoulli(0.3) ? 1.0 : 0.0;
    const Dataset d = single_country(Matrix::Zero(200, 1), y);
    eval::BootstrapConfig cfg;
    cfg.n_resamples = 1000;
    cfg.seed = derive_seed(42, static_cast<std::uint64_t>(s));
    const auto r = eval::bootstrap_ci([](const Dataset& t, std::uint64_t) { return t.outcome.mean(); }, d, cfg,
                                      "proportion");
    covered += r.ci_low <= 0.3 && 0.3 <= r.ci_high;
  }
  const double rate = static_cast<double>(covered) / sims;
  return {rate >= 0.93 && rate <= 0.97, "coverage " + fmt("%.3f", rate) + " over 500 simulations"};
}

// ---- 9 ----

Outcome calibration_metrics() {
  Rng rng(9);
  const Eigen::Index n = 100000;
  Matrix x(n, 1);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform();
    y[i] = rng.bernoulli(x(i, 0)) ? 1.0 : 0.0;
  }
  const eval::Predictor identity = [](const Matrix& rows) { return Vector(rows.col(0)); };
  const auto c = eval::calibration_report(identity, single_country(x, y));
  // p ~ U(0,1): E[p(1-p)] = 1/6; the calibration variance term is zero.
  const double analytic = 1.0 / 6.0;
  return {c.ece < 0.01 && std::abs(c.brier - analytic) <= 0.005,
          "ECE " + fmt("%.4f", c.ece) + ", Brier " + fmt("%.4f", c.brier) + " vs analytic " + fmt("%.4f", analytic)};
}

// ---- 10 ----

Outcome loco_integrity() {
  SynthConfig cfg;
  const Dataset data = synth_generate(cfg);
  const auto countries = data.countries();
  std::vector<std::vector<std::int64_t>> seen(countries.size());
  std::vector<std::string> trained_without(countries.size());
  // Each fold's trainer records the row_ids it was given.
  const eval::Trainer trainer = [&](const Dataset& train, std::uint64_t) -> eval::Predictor {
    const auto present = train.countries();
    std::size_t fold = 0;
    while (fold < countries.size() && std::find(present.begin(), present.end(), countries[fold]) != present.end()) {
      ++fold;
    }
    seen[fold] = train.row_id;
    const auto clf = baselines::train_logreg(train, {});
    return [clf](const Matrix& rows) { return baselines::predict_proba(clf, rows); };
  };
  const auto result = eval::loco_run(trainer, data, 42);
  std::size_t violations = 0, folds = 0;
  for (std::size_t f = 0; f < countries.size(); ++f) {
    if (seen[f].empty()) continue;
    ++folds;
    std::sort(seen[f].begin(), seen[f].end());
    for (std::size_t i : data.rows_of_country(countries[f])) {
      violations += std::binary_search(seen[f].begin(), seen[f].end(), data.row_id[i]);
    }
    violations += result.folds[f].overlap;
  }
  return {folds == 12 && violations == 0 && result.folds.size() == 12,
          std::to_string(folds) + " folds instrumented, " + std::to_string(violations) + " train/test row_id overlaps"};
}

// ---- 11 ----

Outcome importance_null() {
  Rng rng(11);
  auto make = [&](Eigen::Index n) {
    Matrix x = gaussian(n, 4, rng);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = rng.bernoulli(1.0 / (1.0 + std::exp(-3.0 * x(i, 0)))) ? 1.0 : 0.0;
    return single_country(x, y);
  };
  const Dataset train = make(3000);
  const Dataset test = make(2000);
  const auto gbdt = baselines::train_gbdt_with_holdout(train, {});
  const auto r = eval::permutation_importance(eval::predictor_of(gbdt), test, 100, 42);
  const auto& sole = r.row("x0");
  const auto& null = r.row("x1");
  return {sole.importance > 0.2 && null.ci_low <= 0.0 && 0.0 <= null.ci_high,
          "sole predictor " + fmt("%.4f", sole.importance) + "; independent " + fmt("%+.4f", null.importance) +
              " CI [" + fmt("%+.4f", null.ci_low) + ", " + fmt("%+.4f", null.ci_high) + "]"};
}

// ---- 12 ----

Outcome equity_direction() {
  SynthConfig cfg;
  cfg.quintile_label_noise = std::array<double, 5>{0.30, 0.225, 0.15, 0.075, 0.0};
  const Dataset data = synth_generate(cfg);
  const Dataset train = data.subset(data.rows_of_countries(country_range(1, 6)));
  const Dataset test = data.subset(data.rows_of_countries(country_range(7, 12)));
  const auto gbdt = baselines::train_gbdt_with_holdout(train, {});
  const auto e = eval::equity_audit(eval::predictor_of(gbdt), test);
  bool monotone = true;
  std::string detail;
  for (std::size_t q = 0; q < e.rows.size(); ++q) {
    detail += "Q" + std::to_string(q + 1) + " " + fmt("%.4f", e.rows[q].auc) + " ";
    if (q > 0 && e.rows[q].auc < e.rows[q - 1].auc) monotone = false;
  }
  return {monotone && e.ratio_defined && e.ratio > 1.05, detail + "ratio Q5/Q1 " + fmt("%.3f", e.ratio)};
}

// ---- 13 ----

Outcome objective_and_ensemble() {
  const double obj = hpo::fairness_objective({{"a", 0.8}, {"b", 0.6}});
  Rng rng(13);
  const Matrix x = gaussian(500, 11, rng);
  const auto schema_names = schema::feature_names();
  const std::vector<std::string> names(schema_names.begin(), schema_names.end());
  const Standardizer s = fit_standardizer(x, names);
  classifier::Ensemble ens;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto ckpt = tmae::random_checkpoint(s, names, std::vector<int>{32, 8}, seed);
    classifier::FinetuneConfig cfg;
    cfg.seed = seed;
    ens.members.push_back(classifier::init_from_encoder(ckpt, cfg));
    ens.seeds.push_back(seed);
  }
  const Vector p = classifier::predict_proba(ens, x);
  Vector manual = Vector::Zero(x.rows());
  for (const auto& m : ens.members) manual += classifier::predict_proba(m, x);
  manual /= static_cast<double>(ens.members.size());
  const double diff = (p - manual).cwiseAbs().maxCoeff();
  return {obj == 1.9 && diff <= 1e-15,
          "objective({0.8,0.6}) = " + fmt("%.17g", obj) + "; max |ensemble - member mean| " + fmt("%.3g", diff)};
}

// ---- 14 ----

int run_cli(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && '" DEVENC_CLI "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "devenc_acceptance_determinism";
  fs::remove_all(root);
  const fs::path a = root / "a", b = root / "b";
  fs::create_directories(a);
  fs::create_directories(b);
  // Every command runs in both directories; b uses more workers.
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
      {"synth --rows 150 --out d.csv", {"d.csv"}},
      {"ingest --input d.csv --out ing.csv", {"ing.csv", "ing.csv.audit.json"}},
      {"pretrain --data d.csv --countries C01,C02,C03,C04 --epochs 3 --hidden 32,8 --out ck.json", {"ck.json"}},
      {"finetune --checkpoint ck.json --data d.csv --countries C05 --max-epochs 8 --out m.json", {"m.json"}},
      {"finetune --checkpoint ck.json --data d.csv --countries C05 --max-epochs 8 --ensemble 3 --out e.json",
       {"e.json"}},
      {"eval --protocol holdout --model e.json --data d.csv --test-countries C06 --out h.json", {"h.json"}},
      {"eval --protocol zeroshot --model m.json --data d.csv --test-countries C11,C12 --out z.json", {"z.json"}},
      {"eval --protocol bootstrap --learner gbdt --data d.csv --train-countries C05 --test-countries C06 "
       "--n-resamples 8 --out b.json",
       {"b.json"}},
      {"eval --protocol loco --learner logreg --data d.csv --out l.json", {"l.json"}},
      {"eval --protocol fewshot --checkpoint ck.json --data d.csv --region R6 --tune-country C11 --sizes 50,100 "
       "--seeds 2 --ensemble 2 --max-epochs 5 --out f.json",
       {"f.json", "f.csv"}},
      {"importance --model m.json --data d.csv --countries C06 --repeats 10 --out i.json", {"i.json"}},
      {"calibration --model m.json --data d.csv --out c.json", {"c.json"}},
      {"equity --model m.json --data d.csv --out q.json", {"q.json"}},
      {"divergence --data d.csv --source C01,C02 --target C11,C12 --out v.json", {"v.json"}},
      {"hpo --data d.csv --search-countries C01,C02 --validation-countries C03,C04 --trials 3 --pretrain-epochs 2 "
       "--max-epochs 5 --out hp.json",
       {"hp.json", "hp.csv"}},
      {"theory-curve --checkpoint ck.json --data d.csv --countries C07,C08 --sizes 20,40 --seeds 2 --max-epochs 5 "
       "--out t.json",
       {"t.json"}},
  };
  std::size_t compared = 0;
  std::vector<std::string> mismatched;
  for (const auto& [args, outputs] : commands) {
    const int ra = run_cli(a, args + " --seed 7 --jobs 1");
    const int rb = run_cli(b, args + " --seed 7 --jobs 3");
    if (ra != 0 || rb != 0) {
      return {false, "command failed (exit " + std::to_string(ra) + "/" + std::to_string(rb) + "): " + args};
    }
    for (const auto& out : outputs) {
      ++compared;
      if (io::read_file(a / out) != io::read_file(b / out)) mismatched.push_back(out);
    }
  }
  // A repeated run in the same place must reproduce too.
  run_cli(a, "synth --rows 150 --out d2.csv --seed 7");
  ++compared;
  if (io::read_file(a / "d.csv") != io::read_file(a / "d2.csv")) mismatched.push_back("d2.csv");
  std::string detail = std::to_string(commands.size()) + " commands, " + std::to_string(compared) +
                       " outputs compared with --jobs 1 vs 3";
  if (!mismatched.empty()) {
    detail += "; differing:";
    for (const auto& m : mismatched) detail += " " + m;
  }
  fs::remove_all(root);
  return {mismatched.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradient_correctness},
      {"AUC oracle equivalence", auc_oracle},
      {"TMAE learns structure", tmae_structure},
      {"transfer gain at N=50", transfer_gain},
      {"few-shot curve shape", fewshot_shape},
      {"sample complexity c/sqrt(n)", sample_complexity},
      {"divergence monotonicity", divergence_monotone},
      {"bootstrap coverage", bootstrap_coverage},
      {"calibration metrics", calibration_metrics},
      {"LOCO integrity", loco_integrity},
      {"importance null", importance_null},
      {"equity direction", equity_direction},
      {"fairness objective and ensemble mean", objective_and_ensemble},
      {"CLI determinism", cli_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += o.pass ? 0 : 1;
    std::printf("%s %2zu %-38s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures;
}
