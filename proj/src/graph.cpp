#include "deeptagrec/graph.hpp"

#include <stdexcept>

namespace dtr {

int UserTagGraph::add_node(NodeKind kind, const std::string& name) {
  auto& index = kind == NodeKind::User ? user_index_ : tag_index_;
  auto it = index.find(name);
  if (it != index.end()) return it->second;
  const int id = node_count();
  index.emplace(name, id);
  kinds_.push_back(kind);
  names_.push_back(name);
  adjacency_.emplace_back();
  neighbor_sets_.emplace_back();
  return id;
}

void UserTagGraph::add_edge(int user, int tag, double weight) {
  if (kind(user) != NodeKind::User || kind(tag) != NodeKind::Tag) {
    throw std::invalid_argument(
        "UserTagGraph: edges must join a user node to a tag node");
  }
  if (neighbor_sets_[user].count(tag)) {
    for (auto& n : adjacency_[user]) {
      if (n.node == tag) n.weight += weight;
    }
    for (auto& n : adjacency_[tag]) {
      if (n.node == user) n.weight += weight;
    }
    return;
  }
  adjacency_[user].push_back({tag, weight});
  adjacency_[tag].push_back({user, weight});
  neighbor_sets_[user].insert(tag);
  neighbor_sets_[tag].insert(user);
  ++edge_count_;
}

std::optional<int> UserTagGraph::find(NodeKind kind,
                                      const std::string& name) const {
  const auto& index = kind == NodeKind::User ? user_index_ : tag_index_;
  auto it = index.find(name);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::string UserTagGraph::qualified_name(int node) const {
  return (kind(node) == NodeKind::User ? "u:" : "t:") + name(node);
}

UserTagGraph build_graph(const std::vector<QuestionRecord>& records) {
  UserTagGraph g;
  for (const auto& rec : records) {
    const int u = g.add_node(NodeKind::User, rec.user_id);
    for (const auto& tag : rec.tags) {
      const int t = g.add_node(NodeKind::Tag, tag);
      g.add_edge(u, t, 1.0);
    }
  }
  return g;
}

Vector node2vec_bias(const std::vector<UserTagGraph::Neighbor>& neighbors,
                     std::optional<int> prev,
                     const std::function<bool(int)>& adjacent_to_prev,
                     double p, double q, bool weighted) {
  if (p <= 0.0 || q <= 0.0) {
    throw std::invalid_argument("transition_probs: p and q must be positive");
  }
  if (neighbors.empty()) {
    throw std::invalid_argument("transition_probs: node has no neighbors");
  }
  Vector weights(neighbors.size());
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    const double w = weighted ? neighbors[i].weight : 1.0;
    if (!prev) {
      weights[i] = w;
    } else if (neighbors[i].node == *prev) {
      weights[i] = w / p;
    } else if (adjacent_to_prev(neighbors[i].node)) {
      weights[i] = w;
    } else {
      weights[i] = w / q;
    }
  }
  return weights / weights.sum();
}

Vector transition_probs(const UserTagGraph& graph, std::optional<int> prev,
                        int cur, double p, double q, bool weighted) {
  return node2vec_bias(
      graph.neighbors(cur), prev,
      [&](int node) { return prev && graph.adjacent(node, *prev); }, p, q,
      weighted);
}

namespace {

int sample_index(const Vector& probs, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    u -= probs[i];
    if (u <= 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

}  // namespace

std::vector<std::vector<int>> generate_walks(const UserTagGraph& graph,
                                             const WalkConfig& config) {
  if (graph.node_count() == 0) {
    throw std::invalid_argument("generate_walks: empty graph");
  }
  if (config.walk_length < 2 || config.walks_per_node < 1) {
    throw std::invalid_argument("generate_walks: bad walk config");
  }
  std::vector<std::vector<int>> walks;
  walks.reserve(static_cast<std::size_t>(graph.node_count()) *
                config.walks_per_node);
  for (int start = 0; start < graph.node_count(); ++start) {
    for (int w = 0; w < config.walks_per_node; ++w) {
      Rng rng(hash_combine(hash_combine(config.seed, start), w));
      std::vector<int> walk{start};
      std::optional<int> prev;
      int cur = start;
      while (static_cast<int>(walk.size()) < config.walk_length) {
        if (graph.neighbors(cur).empty()) break;  // isolated node
        const Vector probs =
            transition_probs(graph, prev, cur, config.p, config.q,
                             config.weighted);
        const int next = graph.neighbors(cur)[sample_index(probs, rng)].node;
        walk.push_back(next);
        prev = cur;
        cur = next;
      }
      walks.push_back(std::move(walk));
    }
  }
  return walks;
}

}  // namespace dtr
