#pragma once

#include <functional>

#include "deeptagrec/types.hpp"

namespace dtr {

/// Fully connected layer, weight is (input_dim x output_dim), logits = W^T v + b.
struct DenseParams {
  Matrix weight;
  Vector bias;

  int input_dim() const { return static_cast<int>(weight.rows()); }
  int output_dim() const { return static_cast<int>(weight.cols()); }
};

Vector dense_forward(const DenseParams& params, const Vector& v);

/// Elementwise logistic function.
Vector sigmoid(const Vector& v);
double sigmoid(double x);

struct BceResult {
  double loss = 0.0;
  Vector grad_probs;  // d loss / d probs, after clamping
};

/// Mean binary cross-entropy over components; probs are clamped to
/// [eps, 1 - eps] with eps = 1e-7 before taking logs.
BceResult bce_loss(const Vector& probs, const Vector& target);

/// Inverted dropout. In training mode each component survives with
/// probability (1 - rate) and is scaled by 1/(1 - rate); in inference
/// mode the input passes through unchanged.
Vector dropout(const Vector& v, double rate, Rng& rng, bool training);

/// Per-component multipliers (0 or 1/(1-rate)) so backward can reuse the mask.
Vector dropout_mask(int n, double rate, Rng& rng);

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment accumulators for one parameter tensor.
struct AdamState {
  Matrix m;
  Matrix v;
  long step = 0;

  static AdamState for_param(const Matrix& param);
};

/// One Adam update with bias correction; mutates param and state.
void adam_step(AdamState& state, const AdamConfig& cfg, Matrix& param,
               const Matrix& grad);

/// Plain SGD fallback.
void sgd_step(double lr, Matrix& param, const Matrix& grad);

/// Max over coordinates of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8),
/// numeric being the central difference of f at theta.
double grad_check(const std::function<double(const Vector&)>& f,
                  const Vector& theta, const Vector& analytic,
                  double eps = 1e-5);

/// Uniform(-s, s) with s = sqrt(6 / (rows + cols)).
Matrix glorot_uniform(int rows, int cols, Rng& rng);

}  // namespace dtr
