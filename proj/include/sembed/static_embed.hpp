#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace sembed {

// Averaged word vectors with hashed character-n-gram buckets for
// out-of-vocabulary words.
struct WordVectorTable {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> word_vectors;
  std::vector<double> bucket_vectors;  // num_buckets x dim, empty when absent
  std::size_t num_buckets = 0;
  std::size_t ngram_min = 3;
  std::size_t ngram_max = 6;

  bool has_buckets() const { return num_buckets > 0; }
};

// Text format: header "count dim", then one line per word: token followed
// by dim reals. Duplicate words keep the first occurrence.
WordVectorTable load_vectors(const std::string& path);
void save_vectors(const WordVectorTable& table, const std::string& path);

// Bucket file: header "num_buckets dim", then rows keyed by bucket id.
void load_buckets(WordVectorTable& table, const std::string& path);

// FNV-1a 64-bit over the n-gram's UTF-8 bytes.
std::uint64_t fnv1a64(const std::string& bytes);

// Character n-grams (codepoint windows) of "<word>" for lengths
// ngram_min..ngram_max.
std::vector<std::string> char_ngrams(const std::string& word,
                                     std::size_t ngram_min,
                                     std::size_t ngram_max);

// In-vocabulary: stored vector. OOV with buckets: mean of the bucket vectors
// of the word's n-grams. OOV without buckets: zero vector.
std::vector<double> word_vector(const WordVectorTable& table,
                                const std::string& word);

// Tokenize, average word_vector over tokens with a nonzero vector; zero
// vector when nothing contributes.
std::vector<double> sentence_embed_avg(const WordVectorTable& table,
                                       const std::string& text);

}  // namespace sembed
