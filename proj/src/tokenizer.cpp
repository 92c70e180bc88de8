#include "sembed/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "sembed/errors.hpp"
#include "sembed/unicode.hpp"

namespace sembed {

Vocabulary::Vocabulary(std::vector<std::string> tokens_by_id)
    : tokens_(std::move(tokens_by_id)) {
  token_to_id_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    token_to_id_.emplace(tokens_[i], static_cast<int>(i + kReservedTokens));
  }
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it != token_to_id_.end() ? it->second : kUnkId;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open vocabulary file for write: " + path);
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open vocabulary file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      throw ParseError("empty token in vocabulary file", line_no);
    }
    if (!uni::is_valid_utf8(line)) {
      throw ParseError("invalid UTF-8 in vocabulary file", line_no);
    }
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens));
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<uint32_t> cps = uni::nfc(uni::decode_utf8(text));
  for (auto& cp : cps) cp = uni::simple_lower(cp);

  std::vector<std::string> tokens;
  std::vector<uint32_t> current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(uni::encode_utf8(current));
      current.clear();
    }
  };
  for (uint32_t cp : cps) {
    if (uni::is_whitespace(cp)) {
      flush();
    } else if (uni::is_punctuation(cp)) {
      flush();
      tokens.push_back(uni::encode_utf8({cp}));
    } else {
      current.push_back(cp);
    }
  }
  flush();
  return tokens;
}

Vocabulary build_vocab(const std::vector<std::string>& corpus,
                       std::size_t max_size) {
  if (max_size < kReservedTokens + 1) {
    throw InputError("build_vocab: max_size must be at least 5");
  }
  // std::map keeps ties resolvable by lexicographic order deterministically
  std::map<std::string, std::size_t> counts;
  for (const auto& text : corpus) {
    for (auto& token : tokenize(text)) ++counts[token];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  const std::size_t keep = std::min(ranked.size(), max_size - kReservedTokens);
  std::vector<std::string> tokens;
  tokens.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) tokens.push_back(ranked[i].first);
  return Vocabulary(std::move(tokens));
}

TokenBatch encode_batch(const std::vector<std::string>& texts,
                        const Vocabulary& vocab, std::size_t max_len) {
  if (max_len < 3) throw InputError("encode_batch: max_len must be >= 3");
  std::vector<std::vector<int>> rows;
  rows.reserve(texts.size());
  std::size_t widest = 0;
  for (const auto& text : texts) {
    std::vector<int> row;
    row.push_back(kClsId);
    for (const auto& token : tokenize(text)) {
      if (row.size() == max_len - 1) break;  // head truncation
      row.push_back(vocab.id_of(token));
    }
    row.push_back(kSepId);
    widest = std::max(widest, row.size());
    rows.push_back(std::move(row));
  }
  TokenBatch out;
  out.batch = rows.size();
  out.seq_len = widest;
  out.ids.assign(out.batch * out.seq_len, kPadId);
  out.mask.assign(out.batch * out.seq_len, 0);
  out.lengths.resize(out.batch);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.lengths[r] = static_cast<int>(rows[r].size());
    for (std::size_t t = 0; t < rows[r].size(); ++t) {
      out.ids[r * out.seq_len + t] = rows[r][t];
      out.mask[r * out.seq_len + t] = 1;
    }
  }
  return out;
}

}  // namespace sembed
