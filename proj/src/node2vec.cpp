#include "deeptagrec/node2vec.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "deeptagrec/nn.hpp"

namespace dtr {

NodeEmbeddings NodeEmbeddings::init(int node_count, int dim, Rng& rng) {
  NodeEmbeddings e;
  e.dim = dim;
  std::uniform_real_distribution<double> unif(-0.5 / dim, 0.5 / dim);
  e.input = Matrix(node_count, dim);
  for (int i = 0; i < node_count; ++i) {
    for (int j = 0; j < dim; ++j) e.input(i, j) = unif(rng);
  }
  e.output = Matrix::Zero(node_count, dim);
  return e;
}

namespace {

std::vector<double> noise_cdf(const std::vector<std::vector<int>>& walks,
                              int node_count) {
  std::vector<double> freq(node_count, 0.0);
  for (const auto& walk : walks) {
    for (int n : walk) freq[n] += 1.0;
  }
  std::vector<double> cdf(node_count, 0.0);
  double total = 0.0;
  for (int i = 0; i < node_count; ++i) {
    total += std::pow(freq[i], 0.75);
    cdf[i] = total;
  }
  if (total <= 0.0) {
    throw std::invalid_argument("train_skipgram: walks are empty");
  }
  for (double& c : cdf) c /= total;
  return cdf;
}

int sample_cdf(const std::vector<double>& cdf, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<int>(it - cdf.begin());
}

// One SGNS update for (center, context, label); accumulates the center
// gradient, updates the context vector in place.
void sgns_pair(Matrix& input, Matrix& output, int center, int context,
               double label, double lr, Vector& center_grad) {
  const double score =
      sigmoid(input.row(center).dot(output.row(context)));
  const double g = lr * (label - score);
  center_grad += g * output.row(context).transpose();
  output.row(context) += g * input.row(center);
}

}  // namespace

NodeEmbeddings train_skipgram(const std::vector<std::vector<int>>& walks,
                              int node_count, const WalkConfig& config) {
  if (walks.empty()) {
    throw std::invalid_argument("train_skipgram: no walks");
  }
  Rng rng(hash_combine(config.seed, 0x5e67));
  NodeEmbeddings emb = NodeEmbeddings::init(node_count, config.dim, rng);
  if (config.epochs == 0) return emb;

  const std::vector<double> cdf = noise_cdf(walks, node_count);
  Vector center_grad(config.dim);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& walk : walks) {
      const int n = static_cast<int>(walk.size());
      for (int i = 0; i < n; ++i) {
        const int center = walk[i];
        const int lo = std::max(0, i - config.window);
        const int hi = std::min(n - 1, i + config.window);
        for (int j = lo; j <= hi; ++j) {
          if (j == i) continue;
          center_grad.setZero();
          sgns_pair(emb.input, emb.output, center, walk[j], 1.0, config.lr,
                    center_grad);
          for (int k = 0; k < config.negatives; ++k) {
            const int noise = sample_cdf(cdf, rng);
            if (noise == walk[j]) continue;
            sgns_pair(emb.input, emb.output, center, noise, 0.0, config.lr,
                      center_grad);
          }
          emb.input.row(center) += center_grad.transpose();
        }
      }
    }
  }
  return emb;
}

double exact_objective(const Matrix& embeddings,
                       const std::vector<std::vector<int>>& neighborhoods) {
  const auto n = embeddings.rows();
  double total = 0.0;
  for (std::size_t u = 0; u < neighborhoods.size(); ++u) {
    if (neighborhoods[u].empty()) continue;
    const Vector scores = embeddings * embeddings.row(u).transpose();
    // log-sum-exp over all nodes
    const double mx = scores.maxCoeff();
    const double lse = mx + std::log((scores.array() - mx).exp().sum());
    for (int nb : neighborhoods[u]) {
      total += scores[nb] - lse;
    }
  }
  return total;
}

std::vector<std::vector<int>> adjacency_neighborhoods(const UserTagGraph& g) {
  std::vector<std::vector<int>> out(g.node_count());
  for (int v = 0; v < g.node_count(); ++v) {
    for (const auto& nb : g.neighbors(v)) out[v].push_back(nb.node);
  }
  return out;
}

Vector user_vector(const NodeEmbeddings& emb, const UserTagGraph& graph,
                   const std::string& user_id) {
  if (auto node = graph.find(NodeKind::User, user_id)) {
    return emb.input.row(*node).transpose();
  }
  return Vector::Zero(emb.dim);
}

void save_node_embeddings(const std::string& path, const UserTagGraph& graph,
                          const NodeEmbeddings& emb) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << graph.node_count() << ' ' << emb.dim << '\n';
  out.precision(17);
  for (int v = 0; v < graph.node_count(); ++v) {
    out << graph.qualified_name(v);
    for (int j = 0; j < emb.dim; ++j) out << ' ' << emb.input(v, j);
    out << '\n';
  }
}

void UserEmbeddingMap::insert(const std::string& id, Vector v) {
  if (vectors.emplace(id, std::move(v)).second) ids.push_back(id);
}

Vector UserEmbeddingMap::get(const std::string& user_id) const {
  auto it = vectors.find(user_id);
  if (it != vectors.end()) return it->second;
  return Vector::Zero(dim);
}

UserEmbeddingMap load_user_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);
  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error("embedding file: missing header");
  }
  std::istringstream hs(header);
  long count = 0;
  int dim = 0;
  if (!(hs >> count >> dim) || dim <= 0) {
    throw std::runtime_error("embedding file: bad header '" + header + "'");
  }
  UserEmbeddingMap map;
  map.dim = dim;
  std::string line;
  long row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string id;
    ls >> id;
    Vector vec(dim);
    for (int i = 0; i < dim; ++i) {
      if (!(ls >> vec[i])) {
        throw std::runtime_error("embedding file: short row " +
                                 std::to_string(row_no));
      }
    }
    if (id.rfind("u:", 0) == 0) {
      map.insert(id.substr(2), std::move(vec));
    }
  }
  return map;
}

UserEmbeddingMap user_embeddings_from(const UserTagGraph& graph,
                                      const NodeEmbeddings& emb) {
  UserEmbeddingMap map;
  map.dim = emb.dim;
  for (int v = 0; v < graph.node_count(); ++v) {
    if (graph.kind(v) == NodeKind::User) {
      map.insert(graph.name(v), emb.input.row(v).transpose());
    }
  }
  return map;
}

}  // namespace dtr
