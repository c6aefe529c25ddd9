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

#include "devenc/error.hpp"
#include "devenc/nn.hpp"

using namespace devenc;
using namespace devenc::nn;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// Half squared error against fixed targets, computed by a plain loop so the
// oracle never touches the library's loss code.
double loss_of(const MlpParams& p, const Matrix& x, const Matrix& target) {
  const Matrix out = predict(p, x);
  double s = 0.0;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double d = out.data()[i] - target.data()[i];
    s += 0.5 * d * d;
  }
  return s / static_cast<double>(x.rows());
}

}  // namespace

TEST_CASE("init_mlp shapes and determinism") {
  const std::vector<int> dims{5, 7, 3};
  const MlpParams a = init_mlp(dims, 9);
  const MlpParams b = init_mlp(dims, 9);
  REQUIRE(a.num_layers() == 2);
  CHECK(a.weights[0].rows() == 7);
  CHECK(a.weights[0].cols() == 5);
  CHECK(a.biases[1].size() == 3);
  CHECK(a.parameter_count() == 5 * 7 + 7 + 7 * 3 + 3);
  CHECK(a.weights[1] == b.weights[1]);
  CHECK(init_mlp(dims, 10).weights[0] != a.weights[0]);
  CHECK_THROWS_AS(init_mlp(std::vector<int>{4}, 1), InvalidArgument);
  CHECK_THROWS_AS(init_mlp(std::vector<int>{4, 0, 1}, 1), InvalidArgument);
}

TEST_CASE("forward matches a hand-computed two-layer network") {
  MlpParams p = init_mlp(std::vector<int>{2, 2, 1}, 1);
  p.weights[0] << 1.0, -1.0, 0.5, 2.0;
  p.biases[0] << 0.0, -1.0;
  p.weights[1] << 3.0, -2.0;
  p.biases[1] << 0.25;
  Matrix x(1, 2);
  x << 2.0, 1.0;
  // hidden pre = (1, 1.0+2-1 = 2); relu keeps both; out = 3 - 4 + .25
  CHECK(predict(p, x)(0, 0) == doctest::Approx(-0.75));
  x << -1.0, 2.0;
  // hidden pre = (-3, 2.5); relu -> (0, 2.5); out = -5 + .25
  CHECK(predict(p, x)(0, 0) == doctest::Approx(-4.75));
}

TEST_CASE("backward agrees with central differences over every coordinate") {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const std::vector<int> dims{4, 6, 5, 2};
    MlpParams p = init_mlp(dims, 100 + trial);
    const Matrix x = random_matrix(8, 4, rng);
    const Matrix target = random_matrix(8, 2, rng);
    Rng dummy(0);
    const ActivationTrace trace = forward(p, x, 0.0, Mode::kEval, dummy);
    const Matrix grad_out = (trace.output() - target) / 8.0;
    const GradientSet g = backward(p, trace, grad_out);
    const double eps = 1e-6;
    double worst = 0.0;
    for (std::size_t l = 0; l < p.num_layers(); ++l) {
      for (Eigen::Index i = 0; i < p.weights[l].size(); ++i) {
        MlpParams q = p;
        q.weights[l].data()[i] += eps;
        const double up = loss_of(q, x, target);
        q.weights[l].data()[i] -= 2 * eps;
        const double down = loss_of(q, x, target);
        const double num = (up - down) / (2 * eps);
        const double ana = g.weights[l].data()[i];
        worst = std::max(worst, std::abs(num - ana) / std::max({std::abs(num), std::abs(ana), 1e-6}));
      }
      for (Eigen::Index i = 0; i < p.biases[l].size(); ++i) {
        MlpParams q = p;
        q.biases[l][i] += eps;
        const double up = loss_of(q, x, target);
        q.biases[l][i] -= 2 * eps;
        const double down = loss_of(q, x, target);
        const double num = (up - down) / (2 * eps);
        worst = std::max(worst, std::abs(num - g.biases[l][i]) / std::max({std::abs(num), std::abs(g.biases[l][i]), 1e-6}));
      }
    }
    CHECK(worst < 1e-4);
    // input gradient
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      Matrix xp = x, xm = x;
      xp.data()[i] += eps;
      xm.data()[i] -= eps;
      const double num = (loss_of(p, xp, target) - loss_of(p, xm, target)) / (2 * eps);
      CHECK(g.input.data()[i] == doctest::Approx(num).epsilon(1e-4));
    }
  }
}

TEST_CASE("grad_check reports small error for a correct closure") {
  Rng rng(3);
  const MlpParams p = init_mlp(std::vector<int>{3, 4, 1}, 2);
  const Matrix x = random_matrix(6, 3, rng);
  Vector y(6);
  y << 1, 0, 1, 1, 0, 0;
  const LossClosure closure = [&](const MlpParams& q) {
    Rng r(0);
    const ActivationTrace t = forward(q, x, 0.0, Mode::kEval, r);
    const BceResult bce = bce_with_logits(t.output().col(0), y);
    Matrix go(6, 1);
    go.col(0) = bce.grad_logits;
    return LossAndGradient{bce.loss, backward(q, t, go)};
  };
  CHECK(grad_check(p, closure) < 1e-5);
}

TEST_CASE("dropout is inverted and off in eval mode") {
  const MlpParams p = init_mlp(std::vector<int>{3, 200, 1}, 4);
  Matrix x = Matrix::Ones(1, 3);
  Rng rng(8);
  const ActivationTrace eval_trace = forward(p, x, 0.5, Mode::kEval, rng);
  CHECK(eval_trace.output()(0, 0) == doctest::Approx(predict(p, x)(0, 0)));
  const ActivationTrace train_trace = forward(p, x, 0.5, Mode::kTrain, rng);
  const Matrix& scale = train_trace.dropout_scale[0];
  int kept = 0;
  for (Eigen::Index i = 0; i < scale.size(); ++i) {
    const double s = scale.data()[i];
    CHECK((s == 0.0 || s == doctest::Approx(2.0)));
    kept += s > 0.0;
  }
  CHECK(kept > 60);
  CHECK(kept < 140);
  CHECK_THROWS_AS(forward(p, x, 1.0, Mode::kTrain, rng), InvalidArgument);
}

TEST_CASE("forward rejects a wrong input width") {
  const MlpParams p = init_mlp(std::vector<int>{3, 2}, 4);
  Rng rng(0);
  CHECK_THROWS_AS(forward(p, Matrix::Ones(2, 4), 0.0, Mode::kEval, rng), ShapeError);
}

TEST_CASE("adam_update follows the bias-corrected recurrence") {
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  std::vector<double> w{1.0, -2.0};
  AdamMoments mom{{0.0, 0.0}, {0.0, 0.0}};
  const std::vector<double> g{0.5, -3.0};
  adam_update(w, g, mom, 1, cfg);
  // After one step m_hat = g and v_hat = g^2, so the move is lr * sign(g).
  CHECK(w[0] == doctest::Approx(1.0 - 0.1).epsilon(1e-7));
  CHECK(w[1] == doctest::Approx(-2.0 + 0.1).epsilon(1e-7));
  // second step by hand
  const std::vector<double> g2{1.0, 1.0};
  const double m0 = 0.9 * 0.05 + 0.1 * 1.0;
  const double v0 = 0.999 * 0.00025 + 0.001 * 1.0;
  const double w0 = w[0];
  const double expect0 = w0 - 0.1 * (m0 / (1 - 0.81)) / (std::sqrt(v0 / (1 - 0.999 * 0.999)) + 1e-8);
  adam_update(w, g2, mom, 2, cfg);
  CHECK(w[0] == doctest::Approx(expect0).epsilon(1e-10));
}

TEST_CASE("adam weight decay is decoupled from the gradient") {
  AdamConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.l2 = 0.5;
  std::vector<double> w{2.0};
  AdamMoments mom{{0.0}, {0.0}};
  adam_update(w, std::vector<double>{0.0}, mom, 1, cfg);
  CHECK(w[0] == doctest::Approx(2.0 * (1 - 0.005)));
}

TEST_CASE("adam_step leaves frozen layers untouched and rejects non-finite gradients") {
  MlpParams p = init_mlp(std::vector<int>{3, 4, 1}, 1);
  const MlpParams before = p;
  AdamState state(p, {});
  GradientSet g = GradientSet::zeros_like(p);
  g.weights[0].setConstant(1.0);
  g.weights[1].setConstant(1.0);
  adam_step(state, p, g, 1);
  CHECK(p.weights[0] == before.weights[0]);
  CHECK(p.weights[1] != before.weights[1]);
  g.weights[1](0, 0) = std::nan("");
  CHECK_THROWS_AS(adam_step(state, p, g), NumericalError);
}

TEST_CASE("masked MSE only counts masked entries") {
  Matrix pred(2, 2), target(2, 2);
  pred << 1, 2, 3, 4;
  target << 0, 0, 0, 0;
  Mask mask(2, 2);
  mask << true, false, false, true;
  const LossResult r = mse_masked_loss(pred, target, mask);
  CHECK(r.loss == doctest::Approx((1.0 + 16.0) / 2.0));
  CHECK(r.grad(0, 1) == 0.0);
  CHECK(r.grad(1, 1) == doctest::Approx(4.0));
  mask.setConstant(false);
  CHECK_THROWS_AS(mse_masked_loss(pred, target, mask), InvalidArgument);
}

TEST_CASE("BCE with logits matches the closed form and stays finite at extremes") {
  Vector z(3), y(3);
  z << 0.0, 2.0, -1.0;
  y << 1.0, 0.0, 0.0;
  const BceResult r = bce_with_logits(z, y);
  const double expect =
      (std::log(2.0) + std::log(1.0 + std::exp(2.0)) + std::log(1.0 + std::exp(-1.0))) / 3.0;
  CHECK(r.loss == doctest::Approx(expect));
  CHECK(r.grad_logits[0] == doctest::Approx((0.5 - 1.0) / 3.0));
  z << 800.0, -800.0, 0.0;
  y << 0.0, 1.0, 1.0;
  const BceResult extreme = bce_with_logits(z, y);
  CHECK(std::isfinite(extreme.loss));
  CHECK(extreme.loss > 5.0);
  y << 0.0, 0.5, 1.0;
  CHECK_THROWS_AS(bce_with_logits(z, y), InvalidArgument);
}

TEST_CASE("sigmoid is symmetric and overflow safe") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(3.0) + sigmoid(-3.0) == doctest::Approx(1.0));
  CHECK(sigmoid(-1000.0) == 0.0);
  CHECK(sigmoid(1000.0) == 1.0);
}
