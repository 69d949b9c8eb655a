// deeptagrec command line: ingest -> build-graph -> embed-users -> train ->
// evaluate -> recommend, plus a gradcheck diagnostic.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "deeptagrec/checkpoint.hpp"
#include "deeptagrec/corpus.hpp"
#include "deeptagrec/metrics.hpp"
#include "deeptagrec/model.hpp"
#include "deeptagrec/node2vec.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dtr;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat dotted-key JSON config; flags beat file beats defaults, and
// DEEPTAGREC_SEED beats the file's seed.
class Config {
 public:
  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw UsageError(std::string("bad config file: ") + e.what());
    }
    if (!j.is_object()) throw UsageError("config file must be a JSON object");
    for (auto& [k, v] : j.items()) values_[k] = v;
  }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      return it->second.get<T>();
    } catch (const json::exception&) {
      throw UsageError("config key '" + key + "' has the wrong type");
    }
  }

 private:
  std::unordered_map<std::string, json> values_;
};

std::vector<QuestionRecord> read_dataset(const std::string& path,
                                         bool report_issues = true) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open dataset: " + path);
  ParseResult parsed = parse_dataset(in);
  if (report_issues) {
    for (const auto& issue : parsed.issues) {
      std::cerr << path << ":" << issue.line << ": " << issue.message << "\n";
    }
  }
  return std::move(parsed.records);
}

void require_input(const std::string& path, const std::string& what) {
  if (!fs::exists(path)) throw UsageError(what + " does not exist: " + path);
}

void save_graph(const UserTagGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (int v = 0; v < g.node_count(); ++v) {
    if (g.kind(v) != NodeKind::User) continue;
    for (const auto& nb : g.neighbors(v)) {
      out << g.name(v) << '\t' << g.name(nb.node) << '\t' << nb.weight << '\n';
    }
  }
}

UserTagGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open graph file: " + path);
  UserTagGraph g;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string user, tag;
    double weight = 1.0;
    if (!std::getline(ls, user, '\t') || !std::getline(ls, tag, '\t') ||
        !(ls >> weight)) {
      throw std::runtime_error("graph file line " + std::to_string(line_no) +
                               ": expected <user>\\t<tag>\\t<weight>");
    }
    g.add_edge(g.add_node(NodeKind::User, user), g.add_node(NodeKind::Tag, tag),
               weight);
  }
  return g;
}

std::vector<int> parse_ks(const std::string& spec) {
  std::vector<int> ks;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      ks.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw UsageError("bad --ks value: " + spec);
    }
    if (ks.back() < 1) throw UsageError("--ks entries must be >= 1");
  }
  if (ks.empty()) throw UsageError("--ks must name at least one k");
  return ks;
}

}  // namespace

int run(int argc, char** argv) {
  // --config is honored before the full parse so flags can override it.
  Config cfg;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") cfg.load(argv[i + 1]);
  }

  std::uint64_t seed = cfg.get<std::uint64_t>("seed", 42);
  if (const char* env_seed = std::getenv("DEEPTAGREC_SEED")) {
    seed = std::strtoull(env_seed, nullptr, 10);
  }

  CLI::App app{"DeepTagRec: content-cum-user tag recommendation"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags (--seed, --config) after the subcommand
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flat dotted keys)");
  app.add_option("--seed", seed, "RNG seed");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate a dataset, write clean JSONL");
  std::string in_data, out_path;
  ingest->add_option("--data", in_data)->required();
  ingest->add_option("--out", out_path)->required();

  // build-graph
  auto* build = app.add_subcommand("build-graph", "build the user-tag graph");
  std::string bg_data, bg_out;
  build->add_option("--data", bg_data)->required();
  build->add_option("--out", bg_out)->required();

  // embed-users
  auto* embed = app.add_subcommand("embed-users", "node2vec over the user-tag graph");
  std::string eu_graph, eu_out;
  WalkConfig walk;
  walk.p = cfg.get<double>("walk.p", 1.0);
  walk.q = cfg.get<double>("walk.q", 1.0);
  walk.walk_length = cfg.get<int>("walk.length", 80);
  walk.walks_per_node = cfg.get<int>("walk.per-node", 10);
  walk.window = cfg.get<int>("walk.window", 10);
  walk.negatives = cfg.get<int>("walk.negatives", 5);
  walk.epochs = cfg.get<int>("walk.epochs", 5);
  walk.lr = cfg.get<double>("walk.lr", 0.025);
  walk.weighted = cfg.get<bool>("walk.weighted", false);
  int emb_dim = cfg.get<int>("walk.dim", 128);
  embed->add_option("--graph", eu_graph)->required();
  embed->add_option("--out", eu_out)->required();
  embed->add_option("--dim", emb_dim);
  embed->add_option("--walk.p", walk.p);
  embed->add_option("--walk.q", walk.q);
  embed->add_option("--walk.length", walk.walk_length);
  embed->add_option("--walk.per-node", walk.walks_per_node);
  embed->add_option("--walk.window", walk.window);
  embed->add_option("--walk.negatives", walk.negatives);
  embed->add_option("--walk.epochs", walk.epochs);
  embed->add_option("--walk.lr", walk.lr);
  embed->add_flag("--walk.weighted", walk.weighted);

  // train
  auto* train_cmd = app.add_subcommand("train", "train the recommender");
  std::string tr_data, tr_word_emb, tr_user_emb, tr_out, tr_agg;
  tr_agg = cfg.get<std::string>("train.agg", "concat");
  TrainConfig tc;
  tc.lr = cfg.get<double>("train.lr", 0.001);
  tc.dropout = cfg.get<double>("train.dropout", 0.5);
  tc.batch_size = cfg.get<int>("train.batch-size", 32);
  tc.epochs = cfg.get<int>("train.epochs", 10);
  int hidden_dim = cfg.get<int>("train.hidden-dim", 1000);
  int max_len = cfg.get<int>("data.max-len", 300);
  int min_count = cfg.get<int>("data.min-count", 1);
  train_cmd->add_option("--data", tr_data)->required();
  train_cmd->add_option("--word-emb", tr_word_emb)->required();
  train_cmd->add_option("--user-emb", tr_user_emb);
  train_cmd->add_option("--out", tr_out)->required();
  train_cmd->add_option("--agg", tr_agg)->check(CLI::IsMember({"add", "concat"}));
  train_cmd->add_option("--train.lr", tc.lr);
  train_cmd->add_option("--train.dropout", tc.dropout);
  train_cmd->add_option("--train.batch-size", tc.batch_size);
  train_cmd->add_option("--train.epochs", tc.epochs);
  train_cmd->add_option("--train.hidden-dim", hidden_dim);
  train_cmd->add_option("--data.max-len", max_len);
  train_cmd->add_option("--data.min-count", min_count);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "compute ranking metrics");
  std::string ev_ckpt, ev_test, ev_report, ev_ks = cfg.get<std::string>("eval.ks", "3,5,10");
  eval_cmd->add_option("--checkpoint", ev_ckpt)->required();
  eval_cmd->add_option("--test", ev_test)->required();
  eval_cmd->add_option("--ks", ev_ks);
  eval_cmd->add_option("--report", ev_report)->required();

  // recommend
  auto* rec_cmd = app.add_subcommand("recommend", "rank tags for one question");
  std::string rc_ckpt, rc_question, rc_user;
  int rc_k = 5;
  rec_cmd->add_option("--checkpoint", rc_ckpt)->required();
  rec_cmd->add_option("--question", rc_question)->required();
  rec_cmd->add_option("--user", rc_user);
  rec_cmd->add_option("--k", rc_k);

  // gradcheck
  auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference gradient check");
  std::string gc_dims = "5,7";
  int gc_seq_len = 4;
  int gc_tags = 11;
  double gc_tol = 1e-4;
  gc_cmd->add_option("--dims", gc_dims, "m,d");
  gc_cmd->add_option("--seq-len", gc_seq_len);
  gc_cmd->add_option("--tags", gc_tags);
  gc_cmd->add_option("--tol", gc_tol);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  if (*ingest) {
    require_input(in_data, "--data");
    std::ifstream in(in_data);
    ParseResult parsed = parse_dataset(in);
    for (const auto& issue : parsed.issues) {
      std::cerr << in_data << ":" << issue.line << ": " << issue.message << "\n";
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
    for (const auto& rec : parsed.records) {
      json j{{"id", rec.id},   {"title", rec.title},     {"body", rec.body},
             {"tags", rec.tags}, {"user_id", rec.user_id}};
      out << j.dump() << "\n";
    }
    std::cout << "ingest: records=" << parsed.records.size()
              << " rejected=" << parsed.issues.size() << "\n";
  } else if (*build) {
    require_input(bg_data, "--data");
    const auto records = read_dataset(bg_data);
    const UserTagGraph g = build_graph(records);
    save_graph(g, bg_out);
    std::cout << "build-graph: nodes=" << g.node_count()
              << " edges=" << g.edge_count() << "\n";
  } else if (*embed) {
    require_input(eu_graph, "--graph");
    walk.dim = emb_dim;
    walk.seed = seed;
    const UserTagGraph g = load_graph(eu_graph);
    const auto walks = generate_walks(g, walk);
    const NodeEmbeddings emb = train_skipgram(walks, g.node_count(), walk);
    save_node_embeddings(eu_out, g, emb);
    std::cout << "embed-users: nodes=" << g.node_count() << " dim=" << walk.dim
              << " walks=" << walks.size() << "\n";
  } else if (*train_cmd) {
    require_input(tr_data, "--data");
    require_input(tr_word_emb, "--word-emb");
    if (!tr_user_emb.empty()) require_input(tr_user_emb, "--user-emb");
    tc.seed = seed;
    const auto records = read_dataset(tr_data);
    if (records.empty()) throw std::runtime_error("train: dataset is empty");
    auto [vocab, tag_vocab] = build_vocab(records, min_count);
    const EmbeddingTable word_emb = load_embeddings_file(tr_word_emb, vocab);
    UserEmbeddingMap user_emb;
    if (!tr_user_emb.empty()) user_emb = load_user_embeddings(tr_user_emb);
    std::vector<EncodedQuestion> encoded;
    encoded.reserve(records.size());
    for (const auto& rec : records) {
      encoded.push_back(encode_question(rec, vocab, tag_vocab, max_len));
    }
    Rng rng(seed);
    const int user_dim = user_emb.dim > 0 ? user_emb.dim : 128;
    ModelParams model = ModelParams::init(
        word_emb.dim, hidden_dim, user_dim, tag_vocab.size(),
        tr_agg == "add" ? AggregationMode::Addition
                        : AggregationMode::Concatenation,
        tc.dropout, rng);
    const TrainResult result = train(model, encoded, word_emb, user_emb, tc);
    for (std::size_t i = 0; i < result.loss_history.size(); ++i) {
      std::cout << "epoch " << (i + 1) << " loss " << result.loss_history[i]
                << "\n";
    }
    save_checkpoint({model, vocab, tag_vocab, word_emb, user_emb}, tr_out);
    std::cout << "train: examples=" << encoded.size()
              << " tags=" << tag_vocab.size() << " checkpoint=" << tr_out
              << "\n";
  } else if (*eval_cmd) {
    require_input(ev_ckpt, "--checkpoint");
    require_input(ev_test, "--test");
    const std::vector<int> ks = parse_ks(ev_ks);
    const Checkpoint ckpt = load_checkpoint(ev_ckpt);
    const auto records = read_dataset(ev_test);
    const MetricsReport report = evaluate(ckpt, records, ks);
    std::ofstream out(ev_report);
    if (!out) throw std::runtime_error("cannot open for writing: " + ev_report);
    out << report.to_json() << "\n";
    std::cout << report.to_json() << "\n";
  } else if (*rec_cmd) {
    require_input(rc_ckpt, "--checkpoint");
    require_input(rc_question, "--question");
    const Checkpoint ckpt = load_checkpoint(rc_ckpt);
    if (rc_k < 1 || rc_k > ckpt.tag_vocab.size()) {
      throw UsageError("--k out of range for tag vocabulary of size " +
                       std::to_string(ckpt.tag_vocab.size()));
    }
    std::ifstream qin(rc_question);
    json qj;
    try {
      qj = json::parse(qin);
    } catch (const json::parse_error& e) {
      throw UsageError(std::string("bad question file: ") + e.what());
    }
    QuestionRecord rec;
    rec.id = qj.value("id", "q");
    rec.title = qj.value("title", "");
    rec.body = qj.value("body", "");
    rec.user_id = rc_user.empty() ? qj.value("user_id", "") : rc_user;
    rec.tags = {"_unused_"};  // not part of inference
    const EncodedQuestion enc =
        encode_question(rec, ckpt.vocab, ckpt.tag_vocab, 300);
    const Vector user_vec = ckpt.user_embeddings.get(rec.user_id);
    const Vector probs = predict(ckpt.model, enc, user_vec, ckpt.word_embeddings);
    const auto ranked = rank_tags(probs, rc_k);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      std::cout << (i + 1) << ' ' << ckpt.tag_vocab.token(ranked[i]) << ' '
                << probs[ranked[i]] << "\n";
    }
  } else if (*gc_cmd) {
    int m = 0, d = 0;
    if (std::sscanf(gc_dims.c_str(), "%d,%d", &m, &d) != 2 || m < 1 || d < 1) {
      throw UsageError("--dims must be m,d");
    }
    Rng rng(seed);
    Vocabulary vocab({"w0", "w1", "w2", "w3"});
    EmbeddingTable emb;
    emb.dim = m;
    emb.table = glorot_uniform(vocab.size() + 2, m, rng);
    emb.table.bottomRows(2).setZero();
    std::vector<std::string> tag_names;
    for (int i = 0; i < gc_tags; ++i) tag_names.push_back("t" + std::to_string(i));
    TagVocabulary tags(tag_names);
    ModelParams model = ModelParams::init(m, d, 9, gc_tags,
                                          AggregationMode::Addition, 0.0, rng);
    EncodedQuestion enc;
    std::uniform_int_distribution<int> tok(0, vocab.size() - 1);
    for (int i = 0; i < gc_seq_len; ++i) enc.token_ids.push_back(tok(rng));
    enc.title_len = gc_seq_len / 2;
    enc.target = Vector::Zero(gc_tags);
    enc.target[0] = 1.0;
    enc.target[gc_tags / 2] = 1.0;
    Vector user_vec = Vector::Random(9);
    const double err = model_grad_check(model, enc, user_vec, emb);
    std::cout << "gradcheck: max relative error " << err << " (tol " << gc_tol
              << ")\n";
    if (!(err < gc_tol)) {
      std::cerr << "gradcheck failed\n";
      return 1;
    }
  }
  return 0;
}

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
