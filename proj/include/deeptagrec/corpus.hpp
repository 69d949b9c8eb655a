#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "deeptagrec/types.hpp"

namespace dtr {

struct QuestionRecord {
  std::string id;
  std::string title;
  std::string body;
  std::vector<std::string> tags;  // distinct, non-empty
  std::string user_id;
};

struct ParseIssue {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct ParseResult {
  std::vector<QuestionRecord> records;
  std::vector<ParseIssue> issues;
};

/// Parses line-delimited JSON records. Malformed lines are reported in
/// `issues` with their line numbers; well-formed records keep input order.
ParseResult parse_dataset(std::istream& in);

/// Strips HTML tags, lowercases, splits on runs of non-alphanumeric chars.
std::vector<std::string> tokenize(const std::string& text);

/// Token <-> index bijection over indices 0..size-1, plus two reserved
/// out-of-range indices (PAD = size, OOV = size + 1) used by the encoder.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  int size() const { return static_cast<int>(tokens_.size()); }
  std::optional<int> index_of(const std::string& token) const;
  const std::string& token(int index) const { return tokens_.at(index); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  int pad_index() const { return size(); }
  int oov_index() const { return size() + 1; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

using TagVocabulary = Vocabulary;

/// Word vocab over tokens occurring >= min_count times in titles+bodies,
/// tag vocab over all tags; both ordered by descending frequency then
/// lexicographically.
std::pair<Vocabulary, TagVocabulary> build_vocab(
    const std::vector<QuestionRecord>& records, int min_count = 1);

/// Embedding rows indexed by vocabulary index; the two trailing rows
/// (PAD, OOV) are always zero, as are rows for tokens absent from the file.
struct EmbeddingTable {
  int dim = 0;
  Matrix table;  // (vocab size + 2) x dim

  Vector row(int index) const { return table.row(index).transpose(); }
};

/// Text format: header "<count> <dim>", then "<token> <v1> ... <vdim>".
EmbeddingTable load_embeddings(std::istream& in, const Vocabulary& vocab);
EmbeddingTable load_embeddings_file(const std::string& path,
                                    const Vocabulary& vocab);

struct EncodedQuestion {
  std::vector<int> token_ids;  // length == max_len, title first
  int title_len = 0;           // encoded title tokens; boundary for chaining
  Vector target;               // multi-hot over tag vocabulary
  std::string user_id;
};

/// Multi-hot vector over tag_vocab; tags missing from the vocabulary are
/// skipped (dropped_count, when given, is incremented per skip).
Vector make_target(const std::vector<std::string>& tags,
                   const TagVocabulary& tag_vocab,
                   std::size_t* dropped_count = nullptr);

EncodedQuestion encode_question(const QuestionRecord& record,
                                const Vocabulary& vocab,
                                const TagVocabulary& tag_vocab,
                                int max_len = 300);

}  // namespace dtr
