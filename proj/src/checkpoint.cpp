#include "deeptagrec/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace dtr {

namespace {

constexpr char kMagic[4] = {'D', 'T', 'R', 'C'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

void put_string(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

void put_matrix(std::string& out, const std::string& name, const Matrix& m) {
  put_string(out, name);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
  }
}

void put_string_list(std::string& out, const std::string& name,
                     const std::vector<std::string>& items) {
  put_string(out, name);
  put_u32(out, static_cast<std::uint32_t>(items.size()));
  for (const auto& s : items) put_string(out, s);
}

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

  std::uint32_t u32(const std::string& what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  double f64(const std::string& what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(
               static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 8;
    double d;
    std::memcpy(&d, &v, 8);
    return d;
  }

  std::string str(const std::string& what) {
    const std::uint32_t len = u32(what);
    need(len, what);
    std::string s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }

  Matrix matrix(std::string* name_out) {
    const std::string name = str("section name");
    const std::uint32_t rows = u32(name);
    const std::uint32_t cols = u32(name);
    Matrix m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
      for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = f64(name);
    }
    *name_out = name;
    return m;
  }

  std::vector<std::string> string_list(std::string* name_out) {
    const std::string name = str("section name");
    const std::uint32_t count = u32(name);
    std::vector<std::string> items;
    items.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) items.push_back(str(name));
    *name_out = name;
    return items;
  }

  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n, const std::string& what) {
    if (pos_ + n > end_) {
      throw std::runtime_error("checkpoint: truncated while reading " + what);
    }
  }

  const std::string& bytes_;
  std::size_t end_;
  std::size_t pos_ = 8;  // past magic + version
};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::string buf;
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);

  const ModelParams& m = ckpt.model;
  const std::vector<std::pair<std::string, const Matrix*>> sections = {
      {"title.Wz", &m.title_gru.Wz}, {"title.Wr", &m.title_gru.Wr},
      {"title.Wh", &m.title_gru.Wh}, {"title.Uz", &m.title_gru.Uz},
      {"title.Ur", &m.title_gru.Ur}, {"title.Uh", &m.title_gru.Uh},
      {"body.Wz", &m.body_gru.Wz},   {"body.Wr", &m.body_gru.Wr},
      {"body.Wh", &m.body_gru.Wh},   {"body.Uz", &m.body_gru.Uz},
      {"body.Ur", &m.body_gru.Ur},   {"body.Uh", &m.body_gru.Uh},
      {"user_proj", &m.user_proj},   {"dense.W", &m.dense.weight},
      {"word_emb", &ckpt.word_embeddings.table},
  };
  Matrix meta(1, 3);
  meta << (m.mode == AggregationMode::Addition ? 1.0 : 0.0), m.dropout_rate,
      static_cast<double>(m.user_dim);
  Matrix bias = m.dense.bias;
  Matrix user_emb(ckpt.user_embeddings.ids.size(), ckpt.user_embeddings.dim);
  for (std::size_t i = 0; i < ckpt.user_embeddings.ids.size(); ++i) {
    user_emb.row(i) =
        ckpt.user_embeddings.vectors.at(ckpt.user_embeddings.ids[i]).transpose();
  }

  put_u32(buf, static_cast<std::uint32_t>(sections.size()) + 3);
  for (const auto& [name, mat] : sections) put_matrix(buf, name, *mat);
  put_matrix(buf, "dense.b", bias);
  put_matrix(buf, "meta", meta);
  put_matrix(buf, "user_emb", user_emb);

  put_u32(buf, 3);
  put_string_list(buf, "vocab", ckpt.vocab.tokens());
  put_string_list(buf, "tags", ckpt.tag_vocab.tokens());
  put_string_list(buf, "users", ckpt.user_embeddings.ids);

  put_u64(buf, fnv1a64(buf));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (bytes.size() < 20) throw std::runtime_error("checkpoint: file too short");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw std::runtime_error("checkpoint: bad magic bytes");
  }
  std::uint32_t version = 0;
  for (int i = 0; i < 4; ++i) {
    version |= static_cast<std::uint32_t>(
                   static_cast<unsigned char>(bytes[4 + i]))
               << (8 * i);
  }
  if (version != kVersion) {
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version));
  }
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) {
    stored |= static_cast<std::uint64_t>(
                  static_cast<unsigned char>(bytes[bytes.size() - 8 + i]))
              << (8 * i);
  }
  if (stored != fnv1a64(bytes.substr(0, bytes.size() - 8))) {
    throw std::runtime_error("checkpoint: checksum mismatch");
  }

  Reader reader(bytes, bytes.size() - 8);
  std::unordered_map<std::string, Matrix> matrices;
  const std::uint32_t n_mat = reader.u32("matrix section count");
  for (std::uint32_t i = 0; i < n_mat; ++i) {
    std::string name;
    Matrix mat = reader.matrix(&name);
    matrices.emplace(std::move(name), std::move(mat));
  }
  std::unordered_map<std::string, std::vector<std::string>> lists;
  const std::uint32_t n_lists = reader.u32("string list count");
  for (std::uint32_t i = 0; i < n_lists; ++i) {
    std::string name;
    auto items = reader.string_list(&name);
    lists.emplace(std::move(name), std::move(items));
  }

  auto mat = [&](const std::string& name) -> Matrix& {
    auto it = matrices.find(name);
    if (it == matrices.end()) {
      throw std::runtime_error("checkpoint: missing section '" + name + "'");
    }
    return it->second;
  };
  auto list = [&](const std::string& name) -> std::vector<std::string>& {
    auto it = lists.find(name);
    if (it == lists.end()) {
      throw std::runtime_error("checkpoint: missing section '" + name + "'");
    }
    return it->second;
  };

  Checkpoint ckpt;
  ModelParams& m = ckpt.model;
  m.title_gru = {mat("title.Wz"), mat("title.Wr"), mat("title.Wh"),
                 mat("title.Uz"), mat("title.Ur"), mat("title.Uh")};
  m.body_gru = {mat("body.Wz"), mat("body.Wr"), mat("body.Wh"),
                mat("body.Uz"), mat("body.Ur"), mat("body.Uh")};
  m.user_proj = mat("user_proj");
  m.dense.weight = mat("dense.W");
  m.dense.bias = mat("dense.b");
  const Matrix& meta = mat("meta");
  if (meta.rows() != 1 || meta.cols() != 3) {
    throw std::runtime_error("checkpoint: bad meta section");
  }
  m.mode = meta(0, 0) != 0.0 ? AggregationMode::Addition
                             : AggregationMode::Concatenation;
  m.dropout_rate = meta(0, 1);
  m.user_dim = static_cast<int>(meta(0, 2));

  ckpt.vocab = Vocabulary(list("vocab"));
  ckpt.tag_vocab = TagVocabulary(list("tags"));
  ckpt.word_embeddings.table = mat("word_emb");
  ckpt.word_embeddings.dim = static_cast<int>(ckpt.word_embeddings.table.cols());

  const Matrix& user_emb = mat("user_emb");
  const auto& users = list("users");
  if (static_cast<std::size_t>(user_emb.rows()) != users.size()) {
    throw std::runtime_error("checkpoint: user embedding row count mismatch");
  }
  ckpt.user_embeddings.dim = m.user_dim;
  for (std::size_t i = 0; i < users.size(); ++i) {
    ckpt.user_embeddings.insert(users[i], user_emb.row(i).transpose());
  }
  return ckpt;
}

}  // namespace dtr
