#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sembed {

// (anchor, entailment, contradiction) sentence triple.
struct TripletExample {
  std::string anchor;
  std::string positive;
  std::string negative;
  bool operator==(const TripletExample&) const = default;
};

// Sentence pair scored 0..5.
struct ScoredPair {
  std::string sentence1;
  std::string sentence2;
  double score = 0.0;
  bool operator==(const ScoredPair&) const = default;
};

struct LabeledText {
  std::string text;
  std::string label;
  bool operator==(const LabeledText&) const = default;
};

template <typename Record>
struct DatasetSplit {
  std::vector<Record> train;
  std::vector<Record> validation;
  std::vector<Record> test;
};

// JSON Lines loaders. One record per line; required keys only; parse errors
// carry 1-based line numbers.
std::vector<TripletExample> load_triplets(const std::string& path);
std::vector<ScoredPair> load_scored_pairs(const std::string& path);
std::vector<LabeledText> load_labeled(const std::string& path);
// Unscored sentence pairs for the cosine report command.
std::vector<std::pair<std::string, std::string>> load_sentence_pairs(
    const std::string& path);

// Serializers with canonical (alphabetical) key order, one record per line.
void save_triplets(const std::vector<TripletExample>& records,
                   const std::string& path);
void save_scored_pairs(const std::vector<ScoredPair>& records,
                       const std::string& path);
void save_labeled(const std::vector<LabeledText>& records,
                  const std::string& path);

struct SynthSpec {
  std::size_t topics = 2;
  std::size_t words_per_topic = 20;
  std::size_t sentence_len = 6;
  std::size_t triplet_count = 512;
  std::size_t pair_count = 500;
  std::size_t labeled_count = 300;
  double labeled_train_fraction = 0.6;
  double labeled_val_fraction = 0.2;  // remainder goes to test
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthData {
  std::vector<TripletExample> triplets;
  std::vector<ScoredPair> pairs;
  DatasetSplit<LabeledText> labeled;
};

// Topic-word sentences: triplets pair same-topic sentences against a
// different topic; pair gold = 5 * (word-set Jaccard binned to 0.5 steps);
// labeled text carries its topic id as the label. Seeded and reproducible.
SynthData synth_generate(const SynthSpec& spec);

}  // namespace sembed
