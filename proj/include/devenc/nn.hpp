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

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "devenc/rng.hpp"
#include "devenc/types.hpp"

namespace devenc::nn {

enum class Activation { kIdentity, kReLU };
enum class Mode { kTrain, kEval };

// Dense network. Hidden layers always use ReLU; the output layer uses
// `output_activation` (Identity for heads and decoders, ReLU for encoders
// whose latent feeds further layers).
struct MlpParams {
  std::vector<int> layer_dims;
  std::vector<Matrix> weights;  // layer l: layer_dims[l+1] x layer_dims[l]
  std::vector<Vector> biases;
  Activation output_activation = Activation::kIdentity;

  std::size_t num_layers() const { return weights.size(); }
  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }
  std::size_t parameter_count() const;
  // Throws ShapeError when shapes disagree with layer_dims or a value is not finite.
  void validate() const;
};

MlpParams init_mlp(std::span<const int> layer_dims, std::uint64_t seed,
                   Activation output_activation = Activation::kIdentity);

struct ActivationTrace {
  Matrix input;
  std::vector<Matrix> pre;   // per layer, before activation
  std::vector<Matrix> post;  // per layer, after activation and dropout
  // Inverted-dropout multipliers per hidden layer; empty when dropout is off.
  std::vector<Matrix> dropout_scale;

  const Matrix& output() const { return post.back(); }
};

ActivationTrace forward(const MlpParams& params, const Matrix& inputs, double dropout_rate,
                        Mode mode, Rng& rng);

// Eval-mode forward pass without the trace.
Matrix predict(const MlpParams& params, const Matrix& inputs);

struct GradientSet {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  Matrix input;  // d loss / d inputs, used for mask-token updates and chaining

  static GradientSet zeros_like(const MlpParams& params);
  double max_abs() const;
};

GradientSet backward(const MlpParams& params, const ActivationTrace& trace, const Matrix& output_grad);

struct AdamConfig {
  double learning_rate = 0.001;
  double l2 = 0.0;  // decoupled weight decay coefficient
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moments for one flat block of parameters.
struct AdamMoments {
  std::vector<double> first;
  std::vector<double> second;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<AdamMoments> weight_moments;
  std::vector<AdamMoments> bias_moments;

  AdamState() = default;
  AdamState(const MlpParams& params, AdamConfig cfg);
};

// One bias-corrected Adam update on a flat block; `step` is the already
// incremented step counter. Decay params <- params - lr*l2*params comes first.
void adam_update(std::span<double> params, std::span<const double> grads, AdamMoments& moments,
                 std::uint64_t step, const AdamConfig& cfg);

// Updates layers [first_trainable_layer, num_layers). Throws NumericalError on
// non-finite gradients, naming the layer and the largest magnitude seen.
void adam_step(AdamState& state, MlpParams& params, const GradientSet& grads,
               std::size_t first_trainable_layer = 0);

struct LossResult {
  double loss = 0.0;
  Matrix grad;
};

// Mean squared error over masked entries only.
LossResult mse_masked_loss(const Matrix& pred, const Matrix& target, const Mask& mask);

inline constexpr double kProbabilityClamp = 1e-7;

struct BceResult {
  double loss = 0.0;
  Vector grad_logits;  // (p - y) / n
};

BceResult bce_loss(const Vector& probabilities, const Vector& labels);
BceResult bce_with_logits(const Vector& logits, const Vector& labels);

double sigmoid(double z);
Vector sigmoid(const Vector& z);

struct LossAndGradient {
  double loss = 0.0;
  GradientSet gradient;
};

using LossClosure = std::function<LossAndGradient(const MlpParams&)>;

// Compares analytic gradients from `closure` at `params` with central finite
// differences on a deterministic sample of at least `min_coordinates`
// coordinates (all of them when the net is smaller). Returns the largest
// |a - n| / max(|a|, |n|, 1e-7).
double grad_check(const MlpParams& params, const LossClosure& closure, double eps = 1e-5,
                  std::size_t min_coordinates = 200, std::uint64_t seed = 0);

}  // namespace devenc::nn
