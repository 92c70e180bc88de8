#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace sembed {

// Reserved token ids. Every vocabulary starts with these four.
inline constexpr int kPadId = 0;
inline constexpr int kClsId = 1;
inline constexpr int kSepId = 2;
inline constexpr int kUnkId = 3;
inline constexpr std::size_t kReservedTokens = 4;

// Immutable after build; lookups are total (unknown -> [UNK]).
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens_by_id);

  int id_of(const std::string& token) const;
  std::size_t size() const { return kReservedTokens + tokens_.size(); }
  // Non-reserved tokens in id order (id = index + 4).
  const std::vector<std::string>& tokens() const { return tokens_; }

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> token_to_id_;
};

// Padded batch of token ids. mask rows are a prefix of ones; every row is
// [CLS] content... [SEP] [PAD]...
struct TokenBatch {
  std::size_t batch = 0;
  std::size_t seq_len = 0;
  std::vector<int> ids;      // batch*seq_len, row-major
  std::vector<int> mask;     // batch*seq_len, 1 = real token
  std::vector<int> lengths;  // per-row real-token count
};

// NFC-normalize, lowercase (simple 1:1 mapping), split on Unicode
// whitespace, then split category-P* characters into standalone tokens.
std::vector<std::string> tokenize(const std::string& text);

// Tokens ranked by (frequency desc, token asc), truncated to max_size - 4.
// An empty corpus yields the reserved-only vocabulary.
Vocabulary build_vocab(const std::vector<std::string>& corpus,
                       std::size_t max_size);

// Each row: [CLS] + ids truncated to max_len-2 (head kept) + [SEP], padded
// to the longest row in the batch.
TokenBatch encode_batch(const std::vector<std::string>& texts,
                        const Vocabulary& vocab, std::size_t max_len);

}  // namespace sembed
