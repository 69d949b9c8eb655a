#include "deeptagrec/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace dtr {

Vector dense_forward(const DenseParams& params, const Vector& v) {
  if (v.size() != params.weight.rows()) {
    throw std::invalid_argument("dense_forward: input dimension mismatch");
  }
  return params.weight.transpose() * v + params.bias;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vector sigmoid(const Vector& v) {
  return v.unaryExpr([](double x) { return sigmoid(x); });
}

BceResult bce_loss(const Vector& probs, const Vector& target) {
  if (probs.size() != target.size()) {
    throw std::invalid_argument("bce_loss: length mismatch");
  }
  constexpr double kEps = 1e-7;
  const auto n = probs.size();
  BceResult out;
  out.grad_probs = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = std::clamp(probs[i], kEps, 1.0 - kEps);
    const double t = target[i];
    out.loss += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
    out.grad_probs[i] = (-t / p + (1.0 - t) / (1.0 - p)) / static_cast<double>(n);
  }
  out.loss /= static_cast<double>(n);
  return out;
}

Vector dropout_mask(int n, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw std::invalid_argument("dropout: rate must lie in [0, 1)");
  }
  Vector mask(n);
  if (rate == 0.0) {
    mask.setOnes();
    return mask;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double scale = 1.0 / (1.0 - rate);
  for (int i = 0; i < n; ++i) {
    mask[i] = unif(rng) < rate ? 0.0 : scale;
  }
  return mask;
}

Vector dropout(const Vector& v, double rate, Rng& rng, bool training) {
  if (rate < 0.0 || rate >= 1.0) {
    throw std::invalid_argument("dropout: rate must lie in [0, 1)");
  }
  if (!training || rate == 0.0) return v;
  return v.cwiseProduct(dropout_mask(static_cast<int>(v.size()), rate, rng));
}

AdamState AdamState::for_param(const Matrix& param) {
  AdamState s;
  s.m = Matrix::Zero(param.rows(), param.cols());
  s.v = Matrix::Zero(param.rows(), param.cols());
  return s;
}

void adam_step(AdamState& state, const AdamConfig& cfg, Matrix& param,
               const Matrix& grad) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols() ||
      state.m.rows() != param.rows() || state.m.cols() != param.cols()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  state.step += 1;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  const double m_corr = 1.0 - std::pow(cfg.beta1, state.step);
  const double v_corr = 1.0 - std::pow(cfg.beta2, state.step);
  param.array() -= cfg.lr * (state.m.array() / m_corr) /
                   ((state.v.array() / v_corr).sqrt() + cfg.eps);
}

void sgd_step(double lr, Matrix& param, const Matrix& grad) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols()) {
    throw std::invalid_argument("sgd_step: shape mismatch");
  }
  param -= lr * grad;
}

double grad_check(const std::function<double(const Vector&)>& f,
                  const Vector& theta, const Vector& analytic, double eps) {
  double max_rel = 0.0;
  Vector probe = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + eps;
    const double fp = f(probe);
    probe[i] = theta[i] - eps;
    const double fm = f(probe);
    probe[i] = theta[i];
    const double numeric = (fp - fm) / (2.0 * eps);
    const double a = analytic[i];
    const double rel =
        std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

Matrix glorot_uniform(int rows, int cols, Rng& rng) {
  const double s = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> unif(-s, s);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m(r, c) = unif(rng);
    }
  }
  return m;
}

}  // namespace dtr
