#pragma once

#include <utility>
#include <vector>

#include "deeptagrec/types.hpp"

namespace dtr {

/// GRU cell weights. Input-to-hidden matrices are stored (d x m) so that
/// W * x maps an input vector to hidden space; U_* are (d x d).
///
/// Gate convention, intentionally:
///   z = sigmoid(Wz x + Uz h_prev)
///   r = sigmoid(Wr x + Ur h_prev)
///   h~ = tanh(Wh x + Uh (r . h_prev))
///   h  = z . h~ + (1 - z) . h_prev
/// z multiplies the candidate, which is the opposite of the common
/// Cho-et-al. layout. Tests depend on this exact form.
struct GruParams {
  Matrix Wz, Wr, Wh;  // d x m
  Matrix Uz, Ur, Uh;  // d x d

  int input_dim() const { return static_cast<int>(Wz.cols()); }
  int hidden_dim() const { return static_cast<int>(Wz.rows()); }

  static GruParams zeros(int input_dim, int hidden_dim);
  static GruParams init(int input_dim, int hidden_dim, Rng& rng);
};

/// Activations recorded at one step, enough to run the step backward.
struct GruStepTrace {
  Vector x, h_prev, z, r, h_cand, h;
};

using GruTrace = std::vector<GruStepTrace>;

Vector gru_step(const GruParams& params, const Vector& x, const Vector& h_prev,
                GruStepTrace* trace = nullptr);

/// Folds gru_step over the sequence starting from h0.
std::pair<Vector, GruTrace> gru_encode(const GruParams& params,
                                       const std::vector<Vector>& xs,
                                       const Vector& h0);

struct GruGrads {
  Matrix dWz, dWr, dWh;
  Matrix dUz, dUr, dUh;
  Vector dh0;
  std::vector<Vector> dx;

  static GruGrads zeros(const GruParams& params, std::size_t steps);
  void add(const GruGrads& other);
};

/// Backpropagation through time over a recorded trace; grad_hn is the loss
/// gradient at the final hidden state.
GruGrads gru_backward(const GruParams& params, const GruTrace& trace,
                      const Vector& grad_hn);

}  // namespace dtr
