#include "deeptagrec/gru.hpp"

#include <stdexcept>

#include "deeptagrec/nn.hpp"

namespace dtr {

GruParams GruParams::zeros(int input_dim, int hidden_dim) {
  GruParams p;
  p.Wz = Matrix::Zero(hidden_dim, input_dim);
  p.Wr = Matrix::Zero(hidden_dim, input_dim);
  p.Wh = Matrix::Zero(hidden_dim, input_dim);
  p.Uz = Matrix::Zero(hidden_dim, hidden_dim);
  p.Ur = Matrix::Zero(hidden_dim, hidden_dim);
  p.Uh = Matrix::Zero(hidden_dim, hidden_dim);
  return p;
}

GruParams GruParams::init(int input_dim, int hidden_dim, Rng& rng) {
  GruParams p;
  p.Wz = glorot_uniform(hidden_dim, input_dim, rng);
  p.Wr = glorot_uniform(hidden_dim, input_dim, rng);
  p.Wh = glorot_uniform(hidden_dim, input_dim, rng);
  p.Uz = glorot_uniform(hidden_dim, hidden_dim, rng);
  p.Ur = glorot_uniform(hidden_dim, hidden_dim, rng);
  p.Uh = glorot_uniform(hidden_dim, hidden_dim, rng);
  return p;
}

Vector gru_step(const GruParams& params, const Vector& x, const Vector& h_prev,
                GruStepTrace* trace) {
  if (x.size() != params.input_dim() || h_prev.size() != params.hidden_dim()) {
    throw std::invalid_argument("gru_step: dimension mismatch");
  }
  const Vector z = sigmoid(params.Wz * x + params.Uz * h_prev);
  const Vector r = sigmoid(params.Wr * x + params.Ur * h_prev);
  const Vector h_cand =
      (params.Wh * x + params.Uh * r.cwiseProduct(h_prev)).array().tanh();
  const Vector h = z.cwiseProduct(h_cand) +
                   (Vector::Ones(z.size()) - z).cwiseProduct(h_prev);
  if (trace != nullptr) {
    *trace = {x, h_prev, z, r, h_cand, h};
  }
  return h;
}

std::pair<Vector, GruTrace> gru_encode(const GruParams& params,
                                       const std::vector<Vector>& xs,
                                       const Vector& h0) {
  if (h0.size() != params.hidden_dim()) {
    throw std::invalid_argument("gru_encode: h0 dimension mismatch");
  }
  GruTrace trace;
  trace.reserve(xs.size());
  Vector h = h0;
  for (const Vector& x : xs) {
    GruStepTrace step;
    h = gru_step(params, x, h, &step);
    trace.push_back(std::move(step));
  }
  return {h, trace};
}

GruGrads GruGrads::zeros(const GruParams& params, std::size_t steps) {
  GruGrads g;
  const int m = params.input_dim();
  const int d = params.hidden_dim();
  g.dWz = Matrix::Zero(d, m);
  g.dWr = Matrix::Zero(d, m);
  g.dWh = Matrix::Zero(d, m);
  g.dUz = Matrix::Zero(d, d);
  g.dUr = Matrix::Zero(d, d);
  g.dUh = Matrix::Zero(d, d);
  g.dh0 = Vector::Zero(d);
  g.dx.assign(steps, Vector::Zero(m));
  return g;
}

void GruGrads::add(const GruGrads& other) {
  dWz += other.dWz;
  dWr += other.dWr;
  dWh += other.dWh;
  dUz += other.dUz;
  dUr += other.dUr;
  dUh += other.dUh;
  dh0 += other.dh0;
}

GruGrads gru_backward(const GruParams& params, const GruTrace& trace,
                      const Vector& grad_hn) {
  if (grad_hn.size() != params.hidden_dim()) {
    throw std::invalid_argument("gru_backward: grad dimension mismatch");
  }
  GruGrads g = GruGrads::zeros(params, trace.size());
  Vector dh = grad_hn;
  for (std::size_t i = trace.size(); i-- > 0;) {
    const GruStepTrace& s = trace[i];
    if (s.x.size() != params.input_dim() ||
        s.h_prev.size() != params.hidden_dim()) {
      throw std::invalid_argument("gru_backward: trace/params shape mismatch");
    }
    const Vector ones = Vector::Ones(dh.size());
    const Vector dz = dh.cwiseProduct(s.h_cand - s.h_prev);
    const Vector dh_cand = dh.cwiseProduct(s.z);
    Vector dh_prev = dh.cwiseProduct(ones - s.z);

    // pre-activation gradients
    const Vector da_h =
        dh_cand.cwiseProduct(ones - s.h_cand.cwiseProduct(s.h_cand));
    const Vector da_z = dz.cwiseProduct(s.z.cwiseProduct(ones - s.z));
    const Vector drh = params.Uh.transpose() * da_h;  // grad of r . h_prev
    const Vector dr = drh.cwiseProduct(s.h_prev);
    const Vector da_r = dr.cwiseProduct(s.r.cwiseProduct(ones - s.r));

    dh_prev += drh.cwiseProduct(s.r);
    dh_prev += params.Uz.transpose() * da_z;
    dh_prev += params.Ur.transpose() * da_r;

    g.dWz += da_z * s.x.transpose();
    g.dWr += da_r * s.x.transpose();
    g.dWh += da_h * s.x.transpose();
    g.dUz += da_z * s.h_prev.transpose();
    g.dUr += da_r * s.h_prev.transpose();
    g.dUh += da_h * s.r.cwiseProduct(s.h_prev).transpose();
    g.dx[i] = params.Wz.transpose() * da_z + params.Wr.transpose() * da_r +
              params.Wh.transpose() * da_h;

    dh = std::move(dh_prev);
  }
  g.dh0 = dh;
  return g;
}

}  // namespace dtr
