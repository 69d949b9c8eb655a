#pragma once

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "deeptagrec/corpus.hpp"
#include "deeptagrec/types.hpp"

namespace dtr {

enum class NodeKind { User, Tag };

/// Undirected bipartite user-tag graph. Edges only join a user to a tag;
/// parallel edges collapse into integer weights.
class UserTagGraph {
 public:
  struct Neighbor {
    int node;
    double weight;
  };

  int add_node(NodeKind kind, const std::string& name);
  void add_edge(int user, int tag, double weight = 1.0);

  int node_count() const { return static_cast<int>(kinds_.size()); }
  NodeKind kind(int node) const { return kinds_.at(node); }
  const std::string& name(int node) const { return names_.at(node); }
  std::optional<int> find(NodeKind kind, const std::string& name) const;
  const std::vector<Neighbor>& neighbors(int node) const {
    return adjacency_.at(node);
  }
  bool adjacent(int a, int b) const {
    return neighbor_sets_.at(a).count(b) > 0;
  }
  std::size_t edge_count() const { return edge_count_; }

  /// "u:" / "t:" prefixed external id.
  std::string qualified_name(int node) const;

 private:
  std::vector<NodeKind> kinds_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> user_index_;
  std::unordered_map<std::string, int> tag_index_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<std::unordered_set<int>> neighbor_sets_;
  std::size_t edge_count_ = 0;
};

/// One node per distinct user and tag; edge (u, t) iff some record by u
/// carries tag t, weighted by the number of such records.
UserTagGraph build_graph(const std::vector<QuestionRecord>& records);

struct WalkConfig {
  double p = 1.0;           // return parameter
  double q = 1.0;           // in-out parameter
  int walk_length = 80;     // L
  int walks_per_node = 10;  // r
  int window = 10;          // w
  int negatives = 5;
  int epochs = 5;
  int dim = 128;
  double lr = 0.025;
  bool weighted = false;
  std::uint64_t seed = 42;
};

/// Second-order node2vec bias over an explicit neighbor list: weight/p for
/// the previous node, weight for neighbors adjacent to it, weight/q
/// otherwise; normalized. adjacent_to_prev answers "is this node adjacent
/// to prev".
Vector node2vec_bias(const std::vector<UserTagGraph::Neighbor>& neighbors,
                     std::optional<int> prev,
                     const std::function<bool(int)>& adjacent_to_prev,
                     double p, double q, bool weighted);

/// Second-order node2vec transition distribution over neighbors(cur), in
/// adjacency order. With no prev node the edge weights are normalized
/// directly.
Vector transition_probs(const UserTagGraph& graph, std::optional<int> prev,
                        int cur, double p, double q, bool weighted = false);

/// r walks of length L from every node; per-walk RNG streams derived from
/// (seed, node, walk index), so output is deterministic given the config.
std::vector<std::vector<int>> generate_walks(const UserTagGraph& graph,
                                             const WalkConfig& config);

}  // namespace dtr
