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

#include "devenc/baselines.hpp"
#include "devenc/error.hpp"
#include "devenc/nn.hpp"
#include "devenc/splits.hpp"

namespace devenc::baselines {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

LogisticObjective logistic_objective(const Matrix& x, const Vector& y, const Vector& w, double b, double l2) {
  const auto n = static_cast<double>(x.rows());
  const Vector z = (x * w).array() + b;
  LogisticObjective out;
  Vector residual(z.size());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    // -[y log s(z) + (1-y) log(1 - s(z))] = softplus(z) - y z
    loss += softplus(z[i]) - y[i] * z[i];
    residual[i] = nn::sigmoid(z[i]) - y[i];
  }
  out.value = loss / n + 0.5 * l2 * w.squaredNorm();
  out.grad_weights = x.transpose() * residual / n + l2 * w;
  out.grad_bias = residual.sum() / n;
  return out;
}

LogisticModel fit_logistic(const Matrix& x, const Vector& y, const LogregConfig& cfg) {
  if (x.rows() == 0) throw DataError("empty training set");
  if (x.rows() != y.size()) throw ShapeError("logistic regression: rows and labels differ in length");
  if (cfg.l2 < 0.0) throw InvalidArgument("l2 must be >= 0");
  LogisticModel m;
  m.weights = Vector::Zero(x.cols());
  m.bias = 0.0;
  LogisticObjective cur = logistic_objective(x, y, m.weights, m.bias, cfg.l2);
  double step = 1.0;
  for (m.iterations = 0; m.iterations < cfg.max_iterations; ++m.iterations) {
    const double g2 = cur.grad_weights.squaredNorm() + cur.grad_bias * cur.grad_bias;
    m.gradient_norm = std::sqrt(g2);
    if (m.gradient_norm < cfg.tolerance) {
      m.converged = true;
      return m;
    }
    step *= 2.0;
    for (;;) {
      const Vector w = m.weights - step * cur.grad_weights;
      const double b = m.bias - step * cur.grad_bias;
      LogisticObjective next = logistic_objective(x, y, w, b, cfg.l2);
      if (next.value <= cur.value - 0.5 * step * g2 || step < 1e-12) {
        m.weights = w;
        m.bias = b;
        cur = std::move(next);
        break;
      }
      step *= 0.5;
    }
  }
  m.gradient_norm = std::sqrt(cur.grad_weights.squaredNorm() + cur.grad_bias * cur.grad_bias);
  m.converged = m.gradient_norm < cfg.tolerance;
  return m;
}

Vector predict_logistic(const LogisticModel& model, const Matrix& x) {
  if (x.cols() != model.weights.size()) throw SchemaError("schema mismatch in logistic regression input");
  return nn::sigmoid(Vector((x * model.weights).array() + model.bias));
}

LogregClassifier train_logreg(const Dataset& train, const LogregConfig& cfg) {
  LogregClassifier clf;
  clf.standardizer = fit_standardizer(train.features, train.feature_names, ZeroVariance::kUnitScale);
  clf.model = fit_logistic(clf.standardizer.transform(train.features), train.outcome, cfg);
  return clf;
}

Vector predict_proba(const LogregClassifier& clf, const Matrix& rows) {
  return predict_logistic(clf.model, clf.standardizer.transform(rows));
}

classifier::ClassifierModel train_cold_mlp(const Dataset& train, const Dataset& val,
                                           const classifier::FinetuneConfig& cfg) {
  classifier::FinetuneConfig cold = cfg;
  cold.freeze_encoder = false;
  return classifier::finetune(classifier::init_cold_start(train, kColdMlpHidden, cold), train, val, cold);
}

classifier::ClassifierModel train_cold_mlp(const Dataset& sample, const classifier::FinetuneConfig& cfg) {
  cfg.validate();
  // Same split as classifier::finetune so both models see identical rows.
  const Split split = outcome_stratified_holdout(sample, cfg.val_fraction, derive_seed(cfg.seed, 14));
  return train_cold_mlp(sample.subset(split.train), sample.subset(split.test), cfg);
}

}  // namespace devenc::baselines
