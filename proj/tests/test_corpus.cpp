#include <doctest.h>

#include <sstream>

#include "deeptagrec/corpus.hpp"

using namespace dtr;

namespace {

QuestionRecord record(const std::string& id, const std::string& title,
                      const std::string& body,
                      std::vector<std::string> tags,
                      const std::string& user = "u1") {
  return {id, title, body, std::move(tags), user};
}

}  // namespace

TEST_CASE("parse_dataset") {
  SUBCASE("one well-formed line") {
    std::istringstream in(
        R"({"id":"1","title":"T","body":"B","tags":["cpp"],"user_id":"u9"})"
        "\n");
    const auto result = parse_dataset(in);
    REQUIRE(result.records.size() == 1);
    CHECK(result.issues.empty());
    CHECK(result.records[0].id == "1");
    CHECK(result.records[0].user_id == "u9");
    CHECK(result.records[0].tags == std::vector<std::string>{"cpp"});
  }
  SUBCASE("empty stream") {
    std::istringstream in("");
    const auto result = parse_dataset(in);
    CHECK(result.records.empty());
    CHECK(result.issues.empty());
  }
  SUBCASE("empty tag set is rejected with the line number") {
    std::istringstream in(
        R"({"id":"1","title":"a","body":"b","tags":["x"],"user_id":"u"})"
        "\n"
        R"({"id":"2","title":"a","body":"b","tags":[],"user_id":"u"})"
        "\n");
    const auto result = parse_dataset(in);
    CHECK(result.records.size() == 1);
    REQUIRE(result.issues.size() == 1);
    CHECK(result.issues[0].line == 2);
    CHECK(result.issues[0].message.find("empty tag set") != std::string::npos);
  }
  SUBCASE("missing field is reported with the line number") {
    std::istringstream in(R"({"id":"1","title":"a","tags":["x"],"user_id":"u"})"
                          "\n");
    const auto result = parse_dataset(in);
    CHECK(result.records.empty());
    REQUIRE(result.issues.size() == 1);
    CHECK(result.issues[0].line == 1);
    CHECK(result.issues[0].message.find("body") != std::string::npos);
  }
  SUBCASE("malformed JSON is a record-level issue, later lines still parse") {
    std::istringstream in(
        "not json\n"
        R"({"id":"2","title":"a","body":"b","tags":["x"],"user_id":"u"})"
        "\n");
    const auto result = parse_dataset(in);
    CHECK(result.records.size() == 1);
    CHECK(result.issues.size() == 1);
    CHECK(result.issues[0].line == 1);
  }
  SUBCASE("duplicate tags collapse to set semantics") {
    std::istringstream in(
        R"({"id":"1","title":"a","body":"b","tags":["x","x","y"],"user_id":"u"})"
        "\n");
    const auto result = parse_dataset(in);
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].tags == std::vector<std::string>{"x", "y"});
  }
}

TEST_CASE("tokenize") {
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("Hello, World") == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize("<p>C++ error</p>") == std::vector<std::string>{"c", "error"});
  CHECK(tokenize("  a\t b\nc ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(tokenize("x86_64") == std::vector<std::string>{"x86", "64"});
}

TEST_CASE("build_vocab") {
  const std::vector<QuestionRecord> records = {
      record("1", "a a b", "", {"t2", "t1"})};
  SUBCASE("min_count 2 keeps only the frequent token") {
    auto [vocab, tags] = build_vocab(records, 2);
    CHECK(vocab.size() == 1);
    CHECK(vocab.index_of("a") == 0);
    CHECK(!vocab.index_of("b").has_value());
    CHECK(tags.size() == 2);
  }
  SUBCASE("min_count 1 keeps both, frequency order first") {
    auto [vocab, tags] = build_vocab(records, 1);
    CHECK(vocab.index_of("a") == 0);
    CHECK(vocab.index_of("b") == 1);
  }
  SUBCASE("ties broken lexicographically") {
    auto [vocab, tags] =
        build_vocab({record("1", "z y", "x", {"b", "a"})}, 1);
    CHECK(vocab.index_of("x") == 0);
    CHECK(vocab.index_of("y") == 1);
    CHECK(vocab.index_of("z") == 2);
    CHECK(tags.index_of("a") == 0);
    CHECK(tags.index_of("b") == 1);
  }
  SUBCASE("min_count 0 is a precondition error") {
    CHECK_THROWS_AS(build_vocab(records, 0), std::invalid_argument);
  }
  SUBCASE("empty record list is an error") {
    CHECK_THROWS_AS(build_vocab({}, 1), std::invalid_argument);
  }
}

TEST_CASE("vocabulary round trip is the identity") {
  Vocabulary vocab({"alpha", "beta", "gamma"});
  for (int i = 0; i < vocab.size(); ++i) {
    CHECK(vocab.index_of(vocab.token(i)) == i);
  }
  CHECK(vocab.pad_index() == 3);
  CHECK(vocab.oov_index() == 4);
}

TEST_CASE("load_embeddings") {
  SUBCASE("direct copy for a present token") {
    Vocabulary vocab({"x"});
    std::istringstream in("1 3\nx 1 2 3\n");
    const auto table = load_embeddings(in, vocab);
    CHECK(table.dim == 3);
    CHECK(table.row(0) == Vector(Eigen::Vector3d(1, 2, 3)));
  }
  SUBCASE("absent token gets the zero row") {
    Vocabulary vocab({"x", "y"});
    std::istringstream in("1 3\nx 1 2 3\n");
    const auto table = load_embeddings(in, vocab);
    CHECK(table.row(*vocab.index_of("y")).isZero());
  }
  SUBCASE("PAD and OOV rows are always zero") {
    Vocabulary vocab({"x"});
    std::istringstream in("1 2\nx 5 6\n");
    const auto table = load_embeddings(in, vocab);
    CHECK(table.row(vocab.pad_index()).isZero());
    CHECK(table.row(vocab.oov_index()).isZero());
  }
  SUBCASE("file tokens outside the vocabulary are ignored") {
    Vocabulary vocab({"x"});
    std::istringstream in("2 2\nzz 9 9\nx 1 2\n");
    const auto table = load_embeddings(in, vocab);
    CHECK(table.row(0) == Vector(Eigen::Vector2d(1, 2)));
  }
  SUBCASE("row with the wrong value count names the row") {
    Vocabulary vocab({"x"});
    std::istringstream in("2 3\nx 1 2 3\ny 1 2 3 4\n");
    CHECK_THROWS_WITH_AS(load_embeddings(in, vocab),
                         doctest::Contains("row 2"), std::runtime_error);
  }
  SUBCASE("short row is a format error") {
    Vocabulary vocab({"x"});
    std::istringstream in("1 3\nx 1 2\n");
    CHECK_THROWS_AS(load_embeddings(in, vocab), std::runtime_error);
  }
  SUBCASE("bad header is a format error") {
    Vocabulary vocab({"x"});
    std::istringstream in("nonsense\n");
    CHECK_THROWS_AS(load_embeddings(in, vocab), std::runtime_error);
  }
}

TEST_CASE("make_target") {
  TagVocabulary tags({"t0", "t1", "t2", "t3", "t4", "t5"});
  SUBCASE("empty tag list gives the zero vector") {
    CHECK(make_target({}, tags).isZero());
  }
  SUBCASE("hand placement at indices 2 and 5") {
    const Vector t = make_target({"t2", "t5"}, tags);
    Vector expect(6);
    expect << 0, 0, 1, 0, 0, 1;
    CHECK(t == expect);
  }
  SUBCASE("entries stay in {0,1} and sum counts in-vocab tags") {
    TagVocabulary two({"a", "b"});
    const Vector t = make_target({"a"}, two);
    CHECK(t[0] == 1.0);
    CHECK(t[1] == 0.0);
    CHECK(t.sum() == 1.0);
  }
  SUBCASE("unknown tags are dropped and counted") {
    std::size_t dropped = 0;
    const Vector t = make_target({"t1", "nope"}, tags, &dropped);
    CHECK(t.sum() == 1.0);
    CHECK(dropped == 1);
  }
}

TEST_CASE("encode_question") {
  Vocabulary vocab({"hello", "world", "body"});
  TagVocabulary tags({"t0", "t1"});
  SUBCASE("short question is right-padded to max_len") {
    const auto enc = encode_question(
        record("1", "hello world", "body", {"t1"}), vocab, tags, 300);
    CHECK(enc.token_ids.size() == 300);
    CHECK(enc.title_len == 2);
    CHECK(enc.token_ids[0] == 0);
    CHECK(enc.token_ids[1] == 1);
    CHECK(enc.token_ids[2] == 2);
    for (int i = 3; i < 300; ++i) CHECK(enc.token_ids[i] == vocab.pad_index());
    CHECK(enc.target[1] == 1.0);
  }
  SUBCASE("long question is truncated, title kept first") {
    std::string body;
    for (int i = 0; i < 400; ++i) body += "world ";
    const auto enc =
        encode_question(record("1", "hello", body, {"t0"}), vocab, tags, 300);
    CHECK(enc.token_ids.size() == 300);
    CHECK(enc.title_len == 1);
    CHECK(enc.token_ids[0] == 0);
    for (int i = 1; i < 300; ++i) CHECK(enc.token_ids[i] == 1);
  }
  SUBCASE("empty title and body give all PAD") {
    const auto enc = encode_question(record("1", "", "", {"t0"}), vocab, tags, 300);
    CHECK(enc.token_ids == std::vector<int>(300, vocab.pad_index()));
    CHECK(enc.title_len == 0);
  }
  SUBCASE("unknown words map to the OOV index") {
    const auto enc = encode_question(
        record("1", "hello zebra", "", {"t0"}), vocab, tags, 4);
    CHECK(enc.token_ids[0] == 0);
    CHECK(enc.token_ids[1] == vocab.oov_index());
  }
  SUBCASE("output length is always exactly max_len") {
    for (int max_len : {1, 2, 5, 50}) {
      const auto enc = encode_question(
          record("1", "hello world hello", "body body", {"t0"}), vocab, tags,
          max_len);
      CHECK(static_cast<int>(enc.token_ids.size()) == max_len);
    }
  }
  SUBCASE("max_len below 1 is a precondition error") {
    CHECK_THROWS_AS(
        encode_question(record("1", "a", "b", {"t0"}), vocab, tags, 0),
        std::invalid_argument);
  }
}
