#pragma once

#include <string>

#include "deeptagrec/corpus.hpp"
#include "deeptagrec/model.hpp"
#include "deeptagrec/node2vec.hpp"

namespace dtr {

/// Everything needed to run inference: model tensors, vocabularies, the
/// frozen word-embedding table and the user embeddings.
struct Checkpoint {
  ModelParams model;
  Vocabulary vocab;
  TagVocabulary tag_vocab;
  EmbeddingTable word_embeddings;
  UserEmbeddingMap user_embeddings;
};

/// Binary format: magic "DTRC", u32 LE version (= 1), a u32-counted list of
/// matrix sections (u32 name length, name, u32 rows, u32 cols, row-major f64
/// LE values), a u32-counted list of string-list sections (name, u32 count,
/// length-prefixed UTF-8 strings), then a trailing FNV-1a 64-bit checksum of
/// all preceding bytes.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dtr
