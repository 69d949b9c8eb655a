#include <doctest.h>

#include <cmath>
#include <set>

#include "deeptagrec/graph.hpp"
#include "deeptagrec/node2vec.hpp"

using namespace dtr;

namespace {

QuestionRecord record(const std::string& user, std::vector<std::string> tags) {
  static int n = 0;
  return {"q" + std::to_string(n++), "", "", std::move(tags), user};
}

// Two 4-node bipartite cliques (2 users x 2 tags each) joined by one
// bridge edge between tag a1 and user b0.
UserTagGraph two_clique_graph() {
  UserTagGraph g;
  for (const char* u : {"a0", "a1"}) {
    const int un = g.add_node(NodeKind::User, u);
    for (const char* t : {"ta0", "ta1"}) {
      g.add_edge(un, g.add_node(NodeKind::Tag, t));
    }
  }
  for (const char* u : {"b0", "b1"}) {
    const int un = g.add_node(NodeKind::User, u);
    for (const char* t : {"tb0", "tb1"}) {
      g.add_edge(un, g.add_node(NodeKind::Tag, t));
    }
  }
  g.add_edge(*g.find(NodeKind::User, "b0"), *g.find(NodeKind::Tag, "ta1"));
  return g;
}

double cosine(const Vector& a, const Vector& b) {
  return a.dot(b) / (a.norm() * b.norm());
}

}  // namespace

TEST_CASE("build_graph") {
  SUBCASE("one record gives a star of unit-weight edges") {
    const UserTagGraph g = build_graph({record("u", {"a", "b"})});
    CHECK(g.node_count() == 3);
    CHECK(g.edge_count() == 2);
    const int u = *g.find(NodeKind::User, "u");
    REQUIRE(g.neighbors(u).size() == 2);
    CHECK(g.neighbors(u)[0].weight == 1.0);
    CHECK(g.adjacent(u, *g.find(NodeKind::Tag, "a")));
  }
  SUBCASE("repeated user-tag pairs accumulate weight") {
    const UserTagGraph g =
        build_graph({record("u", {"a"}), record("u", {"a"})});
    CHECK(g.edge_count() == 1);
    const int u = *g.find(NodeKind::User, "u");
    CHECK(g.neighbors(u)[0].weight == 2.0);
  }
  SUBCASE("empty record list gives an empty graph") {
    CHECK(build_graph({}).node_count() == 0);
  }
  SUBCASE("bipartiteness holds for every edge") {
    const UserTagGraph g = build_graph(
        {record("u1", {"a", "b"}), record("u2", {"b", "c"}), record("u1", {"c"})});
    for (int v = 0; v < g.node_count(); ++v) {
      for (const auto& nb : g.neighbors(v)) {
        CHECK(g.kind(v) != g.kind(nb.node));
      }
    }
  }
  SUBCASE("user-user edges are rejected") {
    UserTagGraph g;
    const int a = g.add_node(NodeKind::User, "a");
    const int b = g.add_node(NodeKind::User, "b");
    CHECK_THROWS_AS(g.add_edge(a, b), std::invalid_argument);
  }
}

TEST_CASE("transition_probs") {
  SUBCASE("p=q=1 unweighted degenerates to uniform") {
    const UserTagGraph g = build_graph({record("u", {"a", "b", "c"})});
    const int u = *g.find(NodeKind::User, "u");
    const Vector probs =
        transition_probs(g, g.neighbors(u)[0].node, u, 1.0, 1.0);
    CHECK(probs.isApproxToConstant(1.0 / 3.0, 1e-12));
  }
  SUBCASE("hand-normalized p=0.5, q=2 bias is (4/7, 2/7, 1/7)") {
    // neighbors of cur: prev itself, one node adjacent to prev, one not
    const std::vector<UserTagGraph::Neighbor> nbrs = {{0, 1.0}, {1, 1.0}, {2, 1.0}};
    const Vector probs = node2vec_bias(
        nbrs, 0, [](int node) { return node == 1; }, 0.5, 2.0, false);
    CHECK(std::abs(probs[0] - 4.0 / 7.0) < 1e-12);
    CHECK(std::abs(probs[1] - 2.0 / 7.0) < 1e-12);
    CHECK(std::abs(probs[2] - 1.0 / 7.0) < 1e-12);
    CHECK(std::abs(probs.sum() - 1.0) < 1e-12);
  }
  SUBCASE("single-neighbor node gets probability one") {
    const UserTagGraph g = build_graph({record("u", {"a"})});
    const int t = *g.find(NodeKind::Tag, "a");
    const Vector probs =
        transition_probs(g, *g.find(NodeKind::User, "u"), t, 0.7, 3.0);
    REQUIRE(probs.size() == 1);
    CHECK(probs[0] == 1.0);
  }
  SUBCASE("first step normalizes edge weights directly") {
    UserTagGraph g;
    const int u = g.add_node(NodeKind::User, "u");
    g.add_edge(u, g.add_node(NodeKind::Tag, "a"), 3.0);
    g.add_edge(u, g.add_node(NodeKind::Tag, "b"), 1.0);
    const Vector probs =
        transition_probs(g, std::nullopt, u, 1.0, 1.0, /*weighted=*/true);
    CHECK(probs[0] == doctest::Approx(0.75));
    CHECK(probs[1] == doctest::Approx(0.25));
  }
  SUBCASE("sampled distributions always sum to 1") {
    const UserTagGraph g = two_clique_graph();
    for (int cur = 0; cur < g.node_count(); ++cur) {
      for (const auto& nb : g.neighbors(cur)) {
        const Vector probs = transition_probs(g, nb.node, cur, 0.25, 4.0);
        CHECK(std::abs(probs.sum() - 1.0) < 1e-12);
        CHECK(probs.minCoeff() >= 0.0);
      }
    }
  }
  SUBCASE("nonpositive p or q is an error") {
    const UserTagGraph g = build_graph({record("u", {"a"})});
    CHECK_THROWS_AS(transition_probs(g, std::nullopt, 0, 0.0, 1.0),
                    std::invalid_argument);
  }
}

TEST_CASE("generate_walks") {
  const UserTagGraph g = two_clique_graph();
  WalkConfig cfg;
  cfg.walk_length = 8;
  cfg.walks_per_node = 3;
  cfg.seed = 7;

  SUBCASE("every consecutive pair is an edge") {
    for (const auto& walk : generate_walks(g, cfg)) {
      for (std::size_t i = 1; i < walk.size(); ++i) {
        CHECK(g.adjacent(walk[i - 1], walk[i]));
      }
    }
  }
  SUBCASE("r walks of length L start from every node") {
    const auto walks = generate_walks(g, cfg);
    CHECK(walks.size() ==
          static_cast<std::size_t>(g.node_count()) * cfg.walks_per_node);
    std::set<int> starts;
    for (const auto& walk : walks) {
      REQUIRE(!walk.empty());
      CHECK(static_cast<int>(walk.size()) == cfg.walk_length);
      starts.insert(walk[0]);
    }
    CHECK(static_cast<int>(starts.size()) == g.node_count());
  }
  SUBCASE("length-2 walks are (start, neighbor)") {
    WalkConfig short_cfg = cfg;
    short_cfg.walk_length = 2;
    for (const auto& walk : generate_walks(g, short_cfg)) {
      REQUIRE(walk.size() == 2);
      CHECK(g.adjacent(walk[0], walk[1]));
    }
  }
  SUBCASE("same seed twice gives identical walks") {
    CHECK(generate_walks(g, cfg) == generate_walks(g, cfg));
  }
  SUBCASE("a path graph forces alternation") {
    const UserTagGraph path = build_graph({record("u", {"t"})});
    WalkConfig path_cfg;
    path_cfg.walk_length = 5;
    path_cfg.walks_per_node = 1;
    for (const auto& walk : generate_walks(path, path_cfg)) {
      REQUIRE(walk.size() == 5);
      for (std::size_t i = 2; i < walk.size(); ++i) {
        CHECK(walk[i] == walk[i - 2]);
      }
    }
  }
  SUBCASE("empty graph is an error") {
    CHECK_THROWS_AS(generate_walks(UserTagGraph{}, cfg), std::invalid_argument);
  }
}

TEST_CASE("train_skipgram") {
  const UserTagGraph g = two_clique_graph();
  WalkConfig cfg;
  cfg.dim = 16;
  cfg.walk_length = 10;
  cfg.walks_per_node = 10;
  cfg.window = 4;
  cfg.seed = 13;
  const auto walks = generate_walks(g, cfg);

  SUBCASE("0 epochs returns the random initialization") {
    WalkConfig zero = cfg;
    zero.epochs = 0;
    Rng rng(hash_combine(cfg.seed, 0x5e67));
    const NodeEmbeddings expect = NodeEmbeddings::init(g.node_count(), cfg.dim, rng);
    const NodeEmbeddings emb = train_skipgram(walks, g.node_count(), zero);
    CHECK(emb.input == expect.input);
  }
  SUBCASE("fixed seed gives identical embeddings") {
    const NodeEmbeddings a = train_skipgram(walks, g.node_count(), cfg);
    const NodeEmbeddings b = train_skipgram(walks, g.node_count(), cfg);
    CHECK(a.input == b.input);
    CHECK(a.output == b.output);
  }
  SUBCASE("two-clique separation: intra-clique cosine dominates") {
    const NodeEmbeddings emb = train_skipgram(walks, g.node_count(), cfg);
    std::vector<int> ca, cb;
    for (int v = 0; v < g.node_count(); ++v) {
      (g.name(v)[0] == 'a' || g.name(v)[1] == 'a' ? ca : cb).push_back(v);
    }
    double intra = 0.0, inter = 0.0;
    int n_intra = 0, n_inter = 0;
    for (int i = 0; i < g.node_count(); ++i) {
      for (int j = i + 1; j < g.node_count(); ++j) {
        const bool same =
            (std::count(ca.begin(), ca.end(), i) != 0) ==
            (std::count(ca.begin(), ca.end(), j) != 0);
        const double c = cosine(emb.input.row(i).transpose(),
                                emb.input.row(j).transpose());
        if (same) {
          intra += c;
          ++n_intra;
        } else {
          inter += c;
          ++n_inter;
        }
      }
    }
    CHECK(intra / n_intra - inter / n_inter > 0.3);
  }
  SUBCASE("training increases the exact softmax objective") {
    WalkConfig zero = cfg;
    zero.epochs = 0;
    const auto nbh = adjacency_neighborhoods(g);
    const double before =
        exact_objective(train_skipgram(walks, g.node_count(), zero).input, nbh);
    const double after =
        exact_objective(train_skipgram(walks, g.node_count(), cfg).input, nbh);
    CHECK(after > before);
  }
  SUBCASE("users end up closer to their own tags") {
    const NodeEmbeddings emb = train_skipgram(walks, g.node_count(), cfg);
    for (int v = 0; v < g.node_count(); ++v) {
      if (g.kind(v) != NodeKind::User) continue;
      double adj = 0.0, non_adj = 0.0;
      int n_adj = 0, n_non = 0;
      for (int t = 0; t < g.node_count(); ++t) {
        if (g.kind(t) != NodeKind::Tag) continue;
        const double c =
            cosine(emb.input.row(v).transpose(), emb.input.row(t).transpose());
        if (g.adjacent(v, t)) {
          adj += c;
          ++n_adj;
        } else {
          non_adj += c;
          ++n_non;
        }
      }
      CHECK(adj / n_adj > non_adj / n_non);
    }
  }
}

TEST_CASE("exact_objective closed forms") {
  SUBCASE("identical embeddings give |pairs| * ln(1/|V|)") {
    Matrix emb(4, 3);
    emb << 1, 2, 3, 1, 2, 3, 1, 2, 3, 1, 2, 3;
    const std::vector<std::vector<int>> nbh = {{1, 2}, {0}, {0}, {}};
    const double expect = 4 * std::log(1.0 / 4.0);
    CHECK(exact_objective(emb, nbh) == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("two-node case matches a scalar hand evaluation") {
    Matrix emb(2, 1);
    emb << 2.0, 0.5;
    // pair (0 -> 1): s01 - ln(exp(s00) + exp(s01)) with s00 = 4, s01 = 1
    const double expect = 1.0 - std::log(std::exp(4.0) + std::exp(1.0));
    CHECK(exact_objective(emb, {{1}, {}}) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("user_vector lookup and cold start") {
  const UserTagGraph g = build_graph({record("u", {"a"})});
  WalkConfig cfg;
  cfg.dim = 8;
  cfg.walk_length = 4;
  cfg.walks_per_node = 2;
  const NodeEmbeddings emb =
      train_skipgram(generate_walks(g, cfg), g.node_count(), cfg);
  const int u = *g.find(NodeKind::User, "u");
  CHECK(user_vector(emb, g, "u") == Vector(emb.input.row(u).transpose()));
  CHECK(user_vector(emb, g, "stranger").isZero());
  CHECK(user_vector(emb, g, "stranger").size() == 8);
}

TEST_CASE("embedding export and reload round trip") {
  const UserTagGraph g = build_graph(
      {record("u1", {"a", "b"}), record("u2", {"b"})});
  WalkConfig cfg;
  cfg.dim = 4;
  cfg.walk_length = 4;
  cfg.walks_per_node = 2;
  const NodeEmbeddings emb =
      train_skipgram(generate_walks(g, cfg), g.node_count(), cfg);
  const std::string path = "test_node_emb.txt";
  save_node_embeddings(path, g, emb);
  const UserEmbeddingMap map = load_user_embeddings(path);
  CHECK(map.dim == 4);
  CHECK(map.ids.size() == 2);
  CHECK(map.get("u1") == user_vector(emb, g, "u1"));
  CHECK(map.get("nobody").isZero());
  std::remove(path.c_str());
}
