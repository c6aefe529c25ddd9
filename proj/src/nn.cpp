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

#include "devenc/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "devenc/error.hpp"

namespace devenc::nn {

std::size_t MlpParams::parameter_count() const {
  std::size_t total = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    total += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  }
  return total;
}

void MlpParams::validate() const {
  if (layer_dims.size() < 2) throw ShapeError("network needs at least an input and an output layer");
  if (weights.size() != layer_dims.size() - 1 || biases.size() != weights.size()) {
    throw ShapeError("layer count does not match layer_dims");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != layer_dims[l + 1] || weights[l].cols() != layer_dims[l] ||
        biases[l].size() != layer_dims[l + 1]) {
      std::ostringstream msg;
      msg << "layer " << l << " has shape " << weights[l].rows() << "x" << weights[l].cols()
          << ", expected " << layer_dims[l + 1] << "x" << layer_dims[l];
      throw ShapeError(msg.str());
    }
    if (!weights[l].allFinite() || !biases[l].allFinite()) {
      throw ShapeError("layer " + std::to_string(l) + " holds non-finite values");
    }
  }
}

MlpParams init_mlp(std::span<const int> layer_dims, std::uint64_t seed, Activation output_activation) {
  if (layer_dims.size() < 2) throw InvalidArgument("invalid architecture: need at least two layer dims");
  for (int d : layer_dims) {
    if (d < 1) throw InvalidArgument("invalid architecture: every layer dim must be >= 1");
  }
  MlpParams params;
  params.layer_dims.assign(layer_dims.begin(), layer_dims.end());
  params.output_activation = output_activation;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const int fan_in = layer_dims[l];
    const int fan_out = layer_dims[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_out, fan_in);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-limit, limit);
    params.weights.push_back(std::move(w));
    params.biases.push_back(Vector::Zero(fan_out));
  }
  return params;
}

namespace {

bool uses_relu(const MlpParams& params, std::size_t layer) {
  return layer + 1 < params.num_layers() || params.output_activation == Activation::kReLU;
}

}  // namespace

ActivationTrace forward(const MlpParams& params, const Matrix& inputs, double dropout_rate, Mode mode,
                        Rng& rng) {
  if (inputs.cols() != params.input_dim()) {
    std::ostringstream msg;
    msg << "input width " << inputs.cols() << " does not match network input " << params.input_dim();
    throw ShapeError(msg.str());
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw InvalidArgument("dropout rate must be in [0, 1)");
  const bool dropout = mode == Mode::kTrain && dropout_rate > 0.0;
  const double keep_scale = 1.0 / (1.0 - dropout_rate);

  ActivationTrace trace;
  trace.input = inputs;
  const std::size_t layers = params.num_layers();
  trace.pre.reserve(layers);
  trace.post.reserve(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& below = l == 0 ? trace.input : trace.post[l - 1];
    Matrix z = below * params.weights[l].transpose();
    z.rowwise() += params.biases[l].transpose();
    Matrix a = uses_relu(params, l) ? Matrix(z.cwiseMax(0.0)) : z;
    if (dropout && l + 1 < layers) {
      Matrix scale(a.rows(), a.cols());
      for (Eigen::Index i = 0; i < scale.size(); ++i) {
        scale.data()[i] = rng.uniform() < dropout_rate ? 0.0 : keep_scale;
      }
      a.array() *= scale.array();
      trace.dropout_scale.push_back(std::move(scale));
    }
    trace.pre.push_back(std::move(z));
    trace.post.push_back(std::move(a));
  }
  return trace;
}

Matrix predict(const MlpParams& params, const Matrix& inputs) {
  Rng unused(0);
  ActivationTrace trace = forward(params, inputs, 0.0, Mode::kEval, unused);
  return std::move(trace.post.back());
}

GradientSet GradientSet::zeros_like(const MlpParams& params) {
  GradientSet g;
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    g.weights.push_back(Matrix::Zero(params.weights[l].rows(), params.weights[l].cols()));
    g.biases.push_back(Vector::Zero(params.biases[l].size()));
  }
  return g;
}

double GradientSet::max_abs() const {
  double m = 0.0;
  for (const auto& w : weights) m = std::max(m, w.size() ? w.cwiseAbs().maxCoeff() : 0.0);
  for (const auto& b : biases) m = std::max(m, b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
  return m;
}

GradientSet backward(const MlpParams& params, const ActivationTrace& trace, const Matrix& output_grad) {
  const std::size_t layers = params.num_layers();
  const bool has_dropout = !trace.dropout_scale.empty();
  if (trace.pre.size() != layers || trace.post.size() != layers ||
      trace.input.cols() != params.input_dim() ||
      (has_dropout && trace.dropout_scale.size() + 1 != layers)) {
    throw ShapeError("stale activation trace: layer count or input width disagrees with params");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    if (trace.pre[l].cols() != params.layer_dims[l + 1]) {
      throw ShapeError("stale activation trace: layer " + std::to_string(l) + " width changed");
    }
  }
  if (output_grad.rows() != trace.input.rows() || output_grad.cols() != params.output_dim()) {
    throw ShapeError("output gradient shape does not match network output");
  }

  GradientSet grads;
  grads.weights.resize(layers);
  grads.biases.resize(layers);
  Matrix delta = output_grad;  // d loss / d post[l]
  for (std::size_t l = layers; l-- > 0;) {
    if (has_dropout && l + 1 < layers) delta.array() *= trace.dropout_scale[l].array();
    if (uses_relu(params, l)) delta.array() *= (trace.pre[l].array() > 0.0).cast<double>();
    const Matrix& below = l == 0 ? trace.input : trace.post[l - 1];
    grads.weights[l].noalias() = delta.transpose() * below;
    grads.biases[l] = delta.colwise().sum().transpose();
    Matrix next = delta * params.weights[l];
    delta = std::move(next);
  }
  grads.input = std::move(delta);
  return grads;
}

AdamState::AdamState(const MlpParams& params, AdamConfig cfg) : config(cfg) {
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    const auto nw = static_cast<std::size_t>(params.weights[l].size());
    const auto nb = static_cast<std::size_t>(params.biases[l].size());
    weight_moments.push_back({std::vector<double>(nw, 0.0), std::vector<double>(nw, 0.0)});
    bias_moments.push_back({std::vector<double>(nb, 0.0), std::vector<double>(nb, 0.0)});
  }
}

void adam_update(std::span<double> params, std::span<const double> grads, AdamMoments& moments,
                 std::uint64_t step, const AdamConfig& cfg) {
  if (params.size() != grads.size() || moments.first.size() != params.size() ||
      moments.second.size() != params.size()) {
    throw ShapeError("adam update: parameter, gradient and moment sizes disagree");
  }
  const double t = static_cast<double>(step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  const double decay = 1.0 - cfg.learning_rate * cfg.l2;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    double& m = moments.first[i];
    double& v = moments.second[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    params[i] = params[i] * decay - cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

void adam_step(AdamState& state, MlpParams& params, const GradientSet& grads,
               std::size_t first_trainable_layer) {
  const std::size_t layers = params.num_layers();
  if (grads.weights.size() != layers || grads.biases.size() != layers ||
      state.weight_moments.size() != layers) {
    throw ShapeError("adam step: gradient/state layer count does not match params");
  }
  for (std::size_t l = first_trainable_layer; l < layers; ++l) {
    if (grads.weights[l].rows() != params.weights[l].rows() ||
        grads.weights[l].cols() != params.weights[l].cols() ||
        grads.biases[l].size() != params.biases[l].size()) {
      throw ShapeError("adam step: gradient shape mismatch at layer " + std::to_string(l));
    }
    if (!grads.weights[l].allFinite() || !grads.biases[l].allFinite()) {
      double worst = 0.0;
      auto scan = [&worst](const double* p, Eigen::Index n) {
        for (Eigen::Index i = 0; i < n; ++i) {
          const double a = std::abs(p[i]);
          if (!(a <= worst)) worst = a;  // NaN propagates into `worst`
        }
      };
      scan(grads.weights[l].data(), grads.weights[l].size());
      scan(grads.biases[l].data(), grads.biases[l].size());
      std::ostringstream msg;
      msg << "non-finite gradient at layer " << l << " (max magnitude " << worst << ")";
      throw NumericalError(msg.str());
    }
  }
  ++state.step;
  for (std::size_t l = first_trainable_layer; l < layers; ++l) {
    auto& w = params.weights[l];
    auto& b = params.biases[l];
    adam_update({w.data(), static_cast<std::size_t>(w.size())},
                {grads.weights[l].data(), static_cast<std::size_t>(w.size())}, state.weight_moments[l],
                state.step, state.config);
    adam_update({b.data(), static_cast<std::size_t>(b.size())},
                {grads.biases[l].data(), static_cast<std::size_t>(b.size())}, state.bias_moments[l],
                state.step, state.config);
  }
}

LossResult mse_masked_loss(const Matrix& pred, const Matrix& target, const Mask& mask) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols() || mask.rows() != pred.rows() ||
      mask.cols() != pred.cols()) {
    throw ShapeError("masked MSE: prediction, target and mask shapes differ");
  }
  const Eigen::Index count = mask.count();
  if (count == 0) throw InvalidArgument("masked MSE is undefined for an empty mask");
  LossResult out;
  out.grad = Matrix::Zero(pred.rows(), pred.cols());
  double sum = 0.0;
  const double inv = 1.0 / static_cast<double>(count);
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    for (Eigen::Index j = 0; j < pred.cols(); ++j) {
      if (!mask(i, j)) continue;
      const double diff = pred(i, j) - target(i, j);
      sum += diff * diff;
      out.grad(i, j) = 2.0 * diff * inv;
    }
  }
  out.loss = sum * inv;
  return out;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Vector sigmoid(const Vector& z) {
  Vector out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = sigmoid(z[i]);
  return out;
}

BceResult bce_loss(const Vector& probabilities, const Vector& labels) {
  if (probabilities.size() != labels.size()) throw ShapeError("BCE: probability and label lengths differ");
  if (probabilities.size() == 0) throw InvalidArgument("BCE: empty input");
  const auto n = static_cast<double>(labels.size());
  BceResult out;
  out.grad_logits.resize(labels.size());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const double y = labels[i];
    if (y != 0.0 && y != 1.0) throw InvalidArgument("BCE: label outside {0,1}");
    const double p = probabilities[i];
    const double pc = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
    sum -= y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc);
    out.grad_logits[i] = (p - y) / n;
  }
  out.loss = sum / n;
  return out;
}

BceResult bce_with_logits(const Vector& logits, const Vector& labels) {
  return bce_loss(sigmoid(logits), labels);
}

double grad_check(const MlpParams& params, const LossClosure& closure, double eps,
                  std::size_t min_coordinates, std::uint64_t seed) {
  const LossAndGradient base = closure(params);
  struct Coord {
    std::size_t layer;
    bool bias;
    Eigen::Index index;
  };
  std::vector<Coord> coords;
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    for (Eigen::Index i = 0; i < params.weights[l].size(); ++i) coords.push_back({l, false, i});
    for (Eigen::Index i = 0; i < params.biases[l].size(); ++i) coords.push_back({l, true, i});
  }
  if (coords.size() > min_coordinates) {
    Rng rng(seed);
    rng.shuffle(std::span<Coord>(coords));
    coords.resize(min_coordinates);
  }
  double worst = 0.0;
  MlpParams probe = params;
  for (const Coord& c : coords) {
    double* slot = c.bias ? probe.biases[c.layer].data() + c.index : probe.weights[c.layer].data() + c.index;
    const double original = *slot;
    *slot = original + eps;
    const double plus = closure(probe).loss;
    *slot = original - eps;
    const double minus = closure(probe).loss;
    *slot = original;
    const double numeric = (plus - minus) / (2.0 * eps);
    const double analytic = c.bias ? base.gradient.biases[c.layer][c.index]
                                   : base.gradient.weights[c.layer].data()[c.index];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-7});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  }
  return worst;
}

}  // namespace devenc::nn
