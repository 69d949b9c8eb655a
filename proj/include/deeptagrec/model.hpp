#pragma once

#include <string>
#include <vector>

#include "deeptagrec/corpus.hpp"
#include "deeptagrec/gru.hpp"
#include "deeptagrec/nn.hpp"
#include "deeptagrec/node2vec.hpp"
#include "deeptagrec/types.hpp"

namespace dtr {

enum class AggregationMode { Addition, Concatenation };

/// Full model: title GRU chained into body GRU, user-vector fusion, dense
/// head with sigmoid output. In Addition mode the user vector goes through
/// a bias-free projection so the zero vector degrades to content-only
/// prediction exactly.
struct ModelParams {
  GruParams title_gru;
  GruParams body_gru;
  Matrix user_proj;  // hidden_dim x user_dim; 0x0 in Concatenation mode
  DenseParams dense;
  AggregationMode mode = AggregationMode::Concatenation;
  double dropout_rate = 0.5;
  int user_dim = 128;

  int input_dim() const { return title_gru.input_dim(); }
  int hidden_dim() const { return title_gru.hidden_dim(); }
  int tag_count() const { return dense.output_dim(); }
  int agg_dim() const {
    return mode == AggregationMode::Addition ? hidden_dim()
                                             : hidden_dim() + user_dim;
  }

  static ModelParams init(int input_dim, int hidden_dim, int user_dim,
                          int tag_count, AggregationMode mode,
                          double dropout_rate, Rng& rng);
};

/// Title tokens folded from h0 = 0 give c_T; body tokens (trailing PAD
/// included) folded from h0 = c_T give the content representation c_B.
Vector encode_content(const ModelParams& model, const EncodedQuestion& encoded,
                      const EmbeddingTable& embeddings,
                      GruTrace* title_trace = nullptr,
                      GruTrace* body_trace = nullptr);

Vector aggregate(const Vector& content, const Vector& user, AggregationMode mode,
                 const Matrix& projection);

/// Inference forward pass (dropout off); probabilities over the tag vocab.
Vector predict(const ModelParams& model, const EncodedQuestion& encoded,
               const Vector& user_vec, const EmbeddingTable& embeddings);

/// Indices of the k largest probabilities, descending; ties broken by
/// ascending index.
std::vector<int> rank_tags(const Vector& probs, int k);

struct TrainConfig {
  double lr = 0.001;
  double dropout = 0.5;
  int batch_size = 32;
  int epochs = 10;
  std::uint64_t seed = 42;
  bool use_adam = true;  // false = plain SGD
};

struct TrainResult {
  std::vector<double> loss_history;  // mean BCE per epoch
};

/// Mini-batch training on BCE loss; word and user embeddings stay frozen.
/// Single-threaded and deterministic for a given seed.
TrainResult train(ModelParams& model,
                  const std::vector<EncodedQuestion>& dataset,
                  const EmbeddingTable& embeddings,
                  const UserEmbeddingMap& user_embeddings,
                  const TrainConfig& config);

/// Per-example gradients of the BCE loss w.r.t. every trainable tensor.
struct ModelGrads {
  GruGrads title;
  GruGrads body;
  Matrix user_proj;
  Matrix dense_w;
  Vector dense_b;
};

/// Forward + backward for one example; returns the loss. The dropout mask,
/// when given, is applied to f_agg (training path).
double model_loss_grads(const ModelParams& model, const EncodedQuestion& encoded,
                        const Vector& user_vec, const EmbeddingTable& embeddings,
                        const Vector* dropout_mask, ModelGrads& grads);

/// Central-difference check of the analytic gradients over every trainable
/// tensor (both GRUs, projection, dense); returns the max relative error.
/// eps = 3e-4 keeps float64 roundoff on near-zero coordinates below the
/// 1e-8 denominator floor of the relative-error formula.
double model_grad_check(const ModelParams& model, const EncodedQuestion& encoded,
                        const Vector& user_vec, const EmbeddingTable& embeddings,
                        double eps = 3e-4);

}  // namespace dtr
