// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace mgforge::tok {

inline constexpr int kBos = 0;
inline constexpr int kEos = 1;
inline constexpr int kPad = 2;
inline constexpr int kUnk = 3;
inline constexpr int kNumReserved = 4;

// Text written by decode() in place of an UNK id.
inline constexpr std::string_view kUnkMarker = "<unk>";

struct TokenSeq {
  std::vector<int> ids;
  std::optional<std::string> source;
};

class Vocab {
 public:
  // `tokens` lists the non-reserved entries in id order, starting at id 4.
  // Throws data_error("InvalidVocab") on duplicates or reserved names.
  explicit Vocab(std::vector<std::string> tokens);
  // Reserved tokens only.
  Vocab() : Vocab(std::vector<std::string>{}) {}

  int size() const { return static_cast<int>(tokens_.size()); }
  // Id of a token text, or kUnk.
  int id_of(std::string_view token) const;
  bool contains(std::string_view token) const;
  // Throws data_error("UnknownId").
  const std::string& token(int id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  // {"tokens": [...]} listing every entry including the reserved ones.
  nlohmann::json to_json() const;
  // Accepts the to_json() layout. Throws data_error("InvalidVocab").
  static Vocab from_json(const nlohmann::json& doc);

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Reserved entries plus every distinct corpus token, by descending count and
// then bytewise. Throws TokenizeError, or data_error("EmptyCorpus").
Vocab build_vocab(std::span<const std::string> corpus);

// BOS, the token ids (unknown tokens become UNK), EOS.
TokenSeq encode(std::string_view smiles, const Vocab& vocab);
// Concatenated token texts, skipping BOS/EOS/PAD; UNK becomes kUnkMarker.
// Throws data_error("UnknownId").
std::string decode(std::span<const int> ids, const Vocab& vocab);
inline std::string decode(const TokenSeq& seq, const Vocab& vocab) { return decode(seq.ids, vocab); }

// Number of UNK ids in an encoded sequence.
int count_unknown(std::span<const int> ids);

}  // namespace mgforge::tok
