#include "deeptagrec/model.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace dtr {

ModelParams ModelParams::init(int input_dim, int hidden_dim, int user_dim,
                              int tag_count, AggregationMode mode,
                              double dropout_rate, Rng& rng) {
  ModelParams m;
  m.mode = mode;
  m.dropout_rate = dropout_rate;
  m.user_dim = user_dim;
  m.title_gru = GruParams::init(input_dim, hidden_dim, rng);
  m.body_gru = GruParams::init(input_dim, hidden_dim, rng);
  if (mode == AggregationMode::Addition) {
    m.user_proj = glorot_uniform(hidden_dim, user_dim, rng);
  } else {
    m.user_proj = Matrix(0, 0);
  }
  const int agg = mode == AggregationMode::Addition ? hidden_dim
                                                    : hidden_dim + user_dim;
  m.dense.weight = glorot_uniform(agg, tag_count, rng);
  m.dense.bias = Vector::Zero(tag_count);
  return m;
}

namespace {

std::vector<Vector> slice_inputs(const EncodedQuestion& encoded,
                                 const EmbeddingTable& embeddings, int begin,
                                 int end) {
  std::vector<Vector> xs;
  xs.reserve(end - begin);
  for (int i = begin; i < end; ++i) {
    xs.push_back(embeddings.row(encoded.token_ids[i]));
  }
  return xs;
}

}  // namespace

Vector encode_content(const ModelParams& model, const EncodedQuestion& encoded,
                      const EmbeddingTable& embeddings, GruTrace* title_trace,
                      GruTrace* body_trace) {
  if (embeddings.dim != model.input_dim()) {
    throw std::invalid_argument("encode_content: embedding dim mismatch");
  }
  const int n = static_cast<int>(encoded.token_ids.size());
  const Vector h0 = Vector::Zero(model.hidden_dim());
  auto [c_t, t_trace] = gru_encode(
      model.title_gru, slice_inputs(encoded, embeddings, 0, encoded.title_len),
      h0);
  auto [c_b, b_trace] = gru_encode(
      model.body_gru, slice_inputs(encoded, embeddings, encoded.title_len, n),
      c_t);
  if (title_trace != nullptr) *title_trace = std::move(t_trace);
  if (body_trace != nullptr) *body_trace = std::move(b_trace);
  return c_b;
}

Vector aggregate(const Vector& content, const Vector& user, AggregationMode mode,
                 const Matrix& projection) {
  if (mode == AggregationMode::Addition) {
    if (projection.rows() != content.size() ||
        projection.cols() != user.size()) {
      throw std::invalid_argument("aggregate: projection shape mismatch");
    }
    return content + projection * user;
  }
  Vector out(content.size() + user.size());
  out << content, user;
  return out;
}

Vector predict(const ModelParams& model, const EncodedQuestion& encoded,
               const Vector& user_vec, const EmbeddingTable& embeddings) {
  const Vector c = encode_content(model, encoded, embeddings);
  const Vector f_agg = aggregate(c, user_vec, model.mode, model.user_proj);
  return sigmoid(dense_forward(model.dense, f_agg));
}

std::vector<int> rank_tags(const Vector& probs, int k) {
  if (k < 1 || k > probs.size()) {
    throw std::invalid_argument("rank_tags: k out of range");
  }
  std::vector<int> idx(probs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                    [&](int a, int b) {
                      if (probs[a] != probs[b]) return probs[a] > probs[b];
                      return a < b;
                    });
  idx.resize(k);
  return idx;
}

double model_loss_grads(const ModelParams& model, const EncodedQuestion& encoded,
                        const Vector& user_vec, const EmbeddingTable& embeddings,
                        const Vector* dropout_mask, ModelGrads& grads) {
  GruTrace title_trace, body_trace;
  const Vector c =
      encode_content(model, encoded, embeddings, &title_trace, &body_trace);
  const Vector f_agg = aggregate(c, user_vec, model.mode, model.user_proj);
  const Vector f_drop =
      dropout_mask != nullptr ? f_agg.cwiseProduct(*dropout_mask).eval() : f_agg;
  const Vector probs = sigmoid(dense_forward(model.dense, f_drop));
  const auto bce = bce_loss(probs, encoded.target);

  // sigmoid + BCE collapse: d loss / d logits = (p - t) / n
  const Vector dlogits =
      (probs - encoded.target) / static_cast<double>(probs.size());
  grads.dense_w = f_drop * dlogits.transpose();
  grads.dense_b = dlogits;
  Vector df = model.dense.weight * dlogits;
  if (dropout_mask != nullptr) df = df.cwiseProduct(*dropout_mask);

  Vector dc;
  if (model.mode == AggregationMode::Addition) {
    dc = df;
    grads.user_proj = df * user_vec.transpose();
  } else {
    dc = df.head(model.hidden_dim());
    grads.user_proj = Matrix(0, 0);
  }
  grads.body = gru_backward(model.body_gru, body_trace, dc);
  grads.title = gru_backward(model.title_gru, title_trace, grads.body.dh0);
  return bce.loss;
}

namespace {

std::vector<Matrix*> trainable_tensors(ModelParams& m) {
  std::vector<Matrix*> out = {&m.title_gru.Wz, &m.title_gru.Wr, &m.title_gru.Wh,
                              &m.title_gru.Uz, &m.title_gru.Ur, &m.title_gru.Uh,
                              &m.body_gru.Wz,  &m.body_gru.Wr,  &m.body_gru.Wh,
                              &m.body_gru.Uz,  &m.body_gru.Ur,  &m.body_gru.Uh};
  if (m.mode == AggregationMode::Addition) out.push_back(&m.user_proj);
  out.push_back(&m.dense.weight);
  return out;
}

}  // namespace

double model_grad_check(const ModelParams& model, const EncodedQuestion& encoded,
                        const Vector& user_vec, const EmbeddingTable& embeddings,
                        double eps) {
  ModelParams work = model;
  auto tensors = trainable_tensors(work);

  Eigen::Index total = work.dense.bias.size();
  for (const Matrix* t : tensors) total += t->size();

  Vector theta(total);
  Eigen::Index off = 0;
  for (const Matrix* t : tensors) {
    theta.segment(off, t->size()) =
        Eigen::Map<const Vector>(t->data(), t->size());
    off += t->size();
  }
  theta.segment(off, work.dense.bias.size()) = work.dense.bias;

  auto unflatten = [&](const Vector& v) {
    Eigen::Index o = 0;
    for (Matrix* t : tensors) {
      Eigen::Map<Vector>(t->data(), t->size()) = v.segment(o, t->size());
      o += t->size();
    }
    work.dense.bias = v.segment(o, work.dense.bias.size());
  };

  ModelGrads g;
  model_loss_grads(work, encoded, user_vec, embeddings, nullptr, g);
  const std::vector<const Matrix*> grad_tensors = [&] {
    std::vector<const Matrix*> out = {&g.title.dWz, &g.title.dWr, &g.title.dWh,
                                      &g.title.dUz, &g.title.dUr, &g.title.dUh,
                                      &g.body.dWz,  &g.body.dWr,  &g.body.dWh,
                                      &g.body.dUz,  &g.body.dUr,  &g.body.dUh};
    if (work.mode == AggregationMode::Addition) out.push_back(&g.user_proj);
    out.push_back(&g.dense_w);
    return out;
  }();
  Vector analytic(total);
  off = 0;
  for (const Matrix* t : grad_tensors) {
    analytic.segment(off, t->size()) =
        Eigen::Map<const Vector>(t->data(), t->size());
    off += t->size();
  }
  analytic.segment(off, g.dense_b.size()) = g.dense_b;

  auto loss_fn = [&](const Vector& v) {
    unflatten(v);
    const Vector probs = predict(work, encoded, user_vec, embeddings);
    return bce_loss(probs, encoded.target).loss;
  };
  const double err = grad_check(loss_fn, theta, analytic, eps);
  unflatten(theta);
  return err;
}

namespace {

struct OptimizerBank {
  AdamConfig cfg;
  bool use_adam;
  double lr;
  std::vector<AdamState> states;
  std::size_t cursor = 0;

  void apply(Matrix& param, const Matrix& grad) {
    if (!use_adam) {
      sgd_step(lr, param, grad);
      return;
    }
    if (cursor == states.size()) states.push_back(AdamState::for_param(param));
    adam_step(states[cursor], cfg, param, grad);
    ++cursor;
  }
};

void apply_gru(OptimizerBank& opt, GruParams& p, const GruGrads& g,
               double scale) {
  opt.apply(p.Wz, (scale * g.dWz).eval());
  opt.apply(p.Wr, (scale * g.dWr).eval());
  opt.apply(p.Wh, (scale * g.dWh).eval());
  opt.apply(p.Uz, (scale * g.dUz).eval());
  opt.apply(p.Ur, (scale * g.dUr).eval());
  opt.apply(p.Uh, (scale * g.dUh).eval());
}

}  // namespace

TrainResult train(ModelParams& model,
                  const std::vector<EncodedQuestion>& dataset,
                  const EmbeddingTable& embeddings,
                  const UserEmbeddingMap& user_embeddings,
                  const TrainConfig& config) {
  if (dataset.empty()) {
    throw std::invalid_argument("train: empty dataset");
  }
  if (config.lr < 0.0 || config.dropout < 0.0 || config.dropout >= 1.0) {
    throw std::invalid_argument("train: bad config");
  }
  Rng shuffle_rng(hash_combine(config.seed, 0x7a1));
  Rng dropout_rng(hash_combine(config.seed, 0xd0));

  OptimizerBank opt;
  opt.use_adam = config.use_adam;
  opt.lr = config.lr;
  opt.cfg.lr = config.lr;

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  const int agg_dim = model.agg_dim();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::size_t end = std::min(order.size(),
                                       b + static_cast<std::size_t>(config.batch_size));
      const double scale = 1.0 / static_cast<double>(end - b);
      ModelGrads acc;
      bool first = true;
      for (std::size_t i = b; i < end; ++i) {
        const EncodedQuestion& ex = dataset[order[i]];
        const Vector user_vec = user_embeddings.dim > 0
                                    ? user_embeddings.get(ex.user_id)
                                    : Vector::Zero(model.user_dim);
        Vector mask = config.dropout > 0.0
                          ? dropout_mask(agg_dim, config.dropout, dropout_rng)
                          : Vector::Ones(agg_dim);
        ModelGrads g;
        epoch_loss +=
            model_loss_grads(model, ex, user_vec, embeddings, &mask, g);
        if (first) {
          acc = std::move(g);
          first = false;
        } else {
          acc.title.add(g.title);
          acc.body.add(g.body);
          if (acc.user_proj.size() > 0) acc.user_proj += g.user_proj;
          acc.dense_w += g.dense_w;
          acc.dense_b += g.dense_b;
        }
      }
      opt.cursor = 0;
      apply_gru(opt, model.title_gru, acc.title, scale);
      apply_gru(opt, model.body_gru, acc.body, scale);
      if (model.mode == AggregationMode::Addition) {
        opt.apply(model.user_proj, (scale * acc.user_proj).eval());
      }
      opt.apply(model.dense.weight, (scale * acc.dense_w).eval());
      Matrix bias = model.dense.bias;
      opt.apply(bias, (scale * acc.dense_b).eval());
      model.dense.bias = bias;
    }
    result.loss_history.push_back(epoch_loss / dataset.size());
  }
  return result;
}

}  // namespace dtr
