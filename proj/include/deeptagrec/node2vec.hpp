#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "deeptagrec/graph.hpp"
#include "deeptagrec/types.hpp"

namespace dtr {

/// Dual-table skip-gram state; the exported embedding is the input table.
struct NodeEmbeddings {
  int dim = 0;
  Matrix input;   // node_count x dim, the mapping f
  Matrix output;  // context vectors, training only

  static NodeEmbeddings init(int node_count, int dim, Rng& rng);
};

/// Skip-gram with negative sampling over (center, context) pairs drawn from
/// sliding windows over the walks. Noise distribution is proportional to
/// node frequency^0.75 in the walk corpus. Single-threaded, seeded.
NodeEmbeddings train_skipgram(const std::vector<std::vector<int>>& walks,
                              int node_count, const WalkConfig& config);

/// Exact softmax neighborhood log-likelihood:
///   sum_u sum_{n in N(u)} [f(n).f(u) - ln sum_v exp(f(v).f(u))]
/// Only feasible on small graphs; used as a test oracle.
double exact_objective(const Matrix& embeddings,
                       const std::vector<std::vector<int>>& neighborhoods);

/// Adjacency neighborhoods of a graph, for exact_objective.
std::vector<std::vector<int>> adjacency_neighborhoods(const UserTagGraph& g);

/// The user's input-table embedding, or the zero vector for unknown users.
Vector user_vector(const NodeEmbeddings& emb, const UserTagGraph& graph,
                   const std::string& user_id);

/// Node embeddings exported to / loaded from the word-embedding text format,
/// node ids prefixed "u:" or "t:".
void save_node_embeddings(const std::string& path, const UserTagGraph& graph,
                          const NodeEmbeddings& emb);

/// User vectors keyed by raw user id; get() returns zero for unknown users.
struct UserEmbeddingMap {
  int dim = 0;
  std::vector<std::string> ids;  // insertion order, for serialization
  std::unordered_map<std::string, Vector> vectors;

  void insert(const std::string& id, Vector v);
  Vector get(const std::string& user_id) const;
};

/// Reads an exported embedding file, keeping only "u:"-prefixed rows.
UserEmbeddingMap load_user_embeddings(const std::string& path);

UserEmbeddingMap user_embeddings_from(const UserTagGraph& graph,
                                      const NodeEmbeddings& emb);

}  // namespace dtr
