// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "mgforge/tokenizer/vocab.h"

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "mgforge/common/error.h"
#include "mgforge/tokenizer/tokenizer.h"

namespace mgforge::tok {

namespace {

constexpr std::string_view kReserved[kNumReserved] = {"<bos>", "<eos>", "<pad>", "<unk>"};

}  // namespace

Vocab::Vocab(std::vector<std::string> tokens) {
  tokens_.reserve(tokens.size() + kNumReserved);
  for (std::string_view r : kReserved) {
    tokens_.emplace_back(r);
  }
  for (auto& t : tokens) {
    tokens_.push_back(std::move(t));
  }
  for (int i = 0; i < size(); ++i) {
    if (!index_.emplace(tokens_[static_cast<std::size_t>(i)], i).second) {
      throw data_error("InvalidVocab", "duplicate vocabulary entry '" + tokens_[static_cast<std::size_t>(i)] + "'");
    }
  }
}

int Vocab::id_of(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end() || it->second < kNumReserved) {
    return kUnk;
  }
  return it->second;
}

bool Vocab::contains(std::string_view token) const { return id_of(token) != kUnk; }

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) {
    throw data_error("UnknownId", "token id " + std::to_string(id) + " outside vocabulary of size " +
                                      std::to_string(size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

nlohmann::json Vocab::to_json() const { return nlohmann::json{{"tokens", tokens_}}; }

Vocab Vocab::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("tokens") || !doc["tokens"].is_array()) {
    throw data_error("InvalidVocab", "vocabulary JSON must be an object with a \"tokens\" array");
  }
  std::vector<std::string> all;
  for (const auto& t : doc["tokens"]) {
    if (!t.is_string()) {
      throw data_error("InvalidVocab", "vocabulary entries must be strings");
    }
    all.push_back(t.get<std::string>());
  }
  if (all.size() < kNumReserved + 1) {
    throw data_error("InvalidVocab", "vocabulary needs the four reserved entries and at least one token");
  }
  for (int i = 0; i < kNumReserved; ++i) {
    if (all[static_cast<std::size_t>(i)] != kReserved[i]) {
      throw data_error("InvalidVocab", "entry " + std::to_string(i) + " must be " + std::string(kReserved[i]));
    }
  }
  return Vocab(std::vector<std::string>(all.begin() + kNumReserved, all.end()));
}

Vocab build_vocab(std::span<const std::string> corpus) {
  std::map<std::string, long> counts;
  for (const std::string& s : corpus) {
    for (std::string& t : tokenize(s)) {
      ++counts[std::move(t)];
    }
  }
  if (counts.empty()) {
    throw data_error("EmptyCorpus", "cannot build a vocabulary from an empty corpus");
  }
  std::vector<std::pair<std::string, long>> ordered(counts.begin(), counts.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  tokens.reserve(ordered.size());
  for (auto& [t, n] : ordered) {
    tokens.push_back(t);
  }
  return Vocab(std::move(tokens));
}

TokenSeq encode(std::string_view smiles, const Vocab& vocab) {
  TokenSeq seq;
  seq.source = std::string(smiles);
  seq.ids.push_back(kBos);
  for (const std::string& t : tokenize(smiles)) {
    seq.ids.push_back(vocab.id_of(t));
  }
  seq.ids.push_back(kEos);
  return seq;
}

std::string decode(std::span<const int> ids, const Vocab& vocab) {
  std::string out;
  for (int id : ids) {
    const std::string& t = vocab.token(id);
    if (id == kUnk) {
      out += kUnkMarker;
    } else if (id >= kNumReserved) {
      out += t;
    }
  }
  return out;
}

int count_unknown(std::span<const int> ids) {
  return static_cast<int>(std::count(ids.begin(), ids.end(), kUnk));
}

}  // namespace mgforge::tok
