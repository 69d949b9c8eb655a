#include "deeptagrec/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dtr {

namespace {

using nlohmann::json;

std::optional<QuestionRecord> parse_record(const std::string& line,
                                           std::size_t line_no,
                                           std::vector<ParseIssue>& issues) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    issues.push_back({line_no, std::string("invalid JSON: ") + e.what()});
    return std::nullopt;
  }
  for (const char* key : {"id", "title", "body", "tags", "user_id"}) {
    if (!j.contains(key)) {
      issues.push_back({line_no, std::string("missing required field '") + key + "'"});
      return std::nullopt;
    }
  }
  QuestionRecord rec;
  try {
    rec.id = j.at("id").get<std::string>();
    rec.title = j.at("title").get<std::string>();
    rec.body = j.at("body").get<std::string>();
    rec.user_id = j.at("user_id").get<std::string>();
    std::set<std::string> tags(j.at("tags").begin(), j.at("tags").end());
    rec.tags.assign(tags.begin(), tags.end());
  } catch (const json::exception& e) {
    issues.push_back({line_no, std::string("bad field type: ") + e.what()});
    return std::nullopt;
  }
  if (rec.tags.empty()) {
    issues.push_back({line_no, "record rejected: empty tag set"});
    return std::nullopt;
  }
  return rec;
}

}  // namespace

ParseResult parse_dataset(std::istream& in) {
  ParseResult out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (auto rec = parse_record(line, line_no, out.issues)) {
      out.records.push_back(std::move(*rec));
    }
  }
  return out;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::string stripped;
  stripped.reserve(text.size());
  bool in_tag = false;
  for (char c : text) {
    if (c == '<') {
      in_tag = true;
    } else if (c == '>' && in_tag) {
      in_tag = false;
      stripped.push_back(' ');
    } else if (!in_tag) {
      stripped.push_back(c);
    }
  }
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : stripped) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      cur.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw std::invalid_argument("Vocabulary: duplicate token '" + tokens_[i] + "'");
    }
  }
}

std::optional<int> Vocabulary::index_of(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::vector<std::string> by_freq_then_lex(
    const std::unordered_map<std::string, long>& counts, long min_count) {
  std::vector<std::pair<std::string, long>> items;
  for (const auto& [tok, n] : counts) {
    if (n >= min_count) items.emplace_back(tok, n);
  }
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> tokens;
  tokens.reserve(items.size());
  for (auto& [tok, n] : items) tokens.push_back(std::move(tok));
  return tokens;
}

}  // namespace

std::pair<Vocabulary, TagVocabulary> build_vocab(
    const std::vector<QuestionRecord>& records, int min_count) {
  if (min_count < 1) {
    throw std::invalid_argument("build_vocab: min_count must be >= 1");
  }
  if (records.empty()) {
    throw std::invalid_argument("build_vocab: empty record list");
  }
  std::unordered_map<std::string, long> word_counts;
  std::unordered_map<std::string, long> tag_counts;
  for (const auto& rec : records) {
    for (const auto& tok : tokenize(rec.title)) ++word_counts[tok];
    for (const auto& tok : tokenize(rec.body)) ++word_counts[tok];
    for (const auto& tag : rec.tags) ++tag_counts[tag];
  }
  return {Vocabulary(by_freq_then_lex(word_counts, min_count)),
          TagVocabulary(by_freq_then_lex(tag_counts, 1))};
}

EmbeddingTable load_embeddings(std::istream& in, const Vocabulary& vocab) {
  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error("embedding file: missing header");
  }
  std::istringstream hs(header);
  long count = 0;
  int dim = 0;
  if (!(hs >> count >> dim) || dim <= 0 || count < 0) {
    throw std::runtime_error("embedding file: bad header '" + header + "'");
  }
  EmbeddingTable table;
  table.dim = dim;
  table.table = Matrix::Zero(vocab.size() + 2, dim);

  std::string line;
  long row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    Vector vec(dim);
    for (int i = 0; i < dim; ++i) {
      if (!(ls >> vec[i])) {
        throw std::runtime_error("embedding file: row " + std::to_string(row_no) +
                                 " ('" + token + "') has fewer than " +
                                 std::to_string(dim) + " values");
      }
    }
    double extra;
    if (ls >> extra) {
      throw std::runtime_error("embedding file: row " + std::to_string(row_no) +
                               " ('" + token + "') has more than " +
                               std::to_string(dim) + " values");
    }
    if (auto idx = vocab.index_of(token)) {
      table.table.row(*idx) = vec.transpose();
    }
  }
  return table;
}

EmbeddingTable load_embeddings_file(const std::string& path,
                                    const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);
  return load_embeddings(in, vocab);
}

Vector make_target(const std::vector<std::string>& tags,
                   const TagVocabulary& tag_vocab, std::size_t* dropped_count) {
  Vector target = Vector::Zero(tag_vocab.size());
  for (const auto& tag : tags) {
    if (auto idx = tag_vocab.index_of(tag)) {
      target[*idx] = 1.0;
    } else if (dropped_count != nullptr) {
      ++*dropped_count;
    }
  }
  return target;
}

EncodedQuestion encode_question(const QuestionRecord& record,
                                const Vocabulary& vocab,
                                const TagVocabulary& tag_vocab, int max_len) {
  if (max_len < 1) {
    throw std::invalid_argument("encode_question: max_len must be >= 1");
  }
  EncodedQuestion out;
  out.user_id = record.user_id;
  out.token_ids.reserve(max_len);

  auto push_tokens = [&](const std::string& text) {
    for (const auto& tok : tokenize(text)) {
      if (static_cast<int>(out.token_ids.size()) >= max_len) return;
      auto idx = vocab.index_of(tok);
      out.token_ids.push_back(idx ? *idx : vocab.oov_index());
    }
  };
  push_tokens(record.title);
  out.title_len = static_cast<int>(out.token_ids.size());
  push_tokens(record.body);
  while (static_cast<int>(out.token_ids.size()) < max_len) {
    out.token_ids.push_back(vocab.pad_index());
  }
  out.target = make_target(record.tags, tag_vocab);
  return out;
}

}  // namespace dtr
