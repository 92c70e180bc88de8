#include "sembed/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "sembed/errors.hpp"
#include "sembed/rng.hpp"
#include "sembed/unicode.hpp"

namespace sembed {

namespace {

using nlohmann::json;

// Parses one JSONL line with exactly the given keys.
json parse_line(const std::string& line, std::size_t line_no,
                const std::vector<std::string>& keys) {
  if (!uni::is_valid_utf8(line)) {
    throw ParseError("invalid UTF-8", line_no);
  }
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ParseError("not a JSON object", line_no);
  }
  for (const auto& key : keys) {
    if (!j.contains(key)) {
      throw ParseError("missing key \"" + key + "\"", line_no);
    }
  }
  if (j.size() != keys.size()) {
    for (const auto& [k, v] : j.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
        throw ParseError("unknown key \"" + k + "\"", line_no);
      }
    }
  }
  return j;
}

std::string string_field(const json& j, const char* key, std::size_t line_no) {
  const auto& v = j.at(key);
  if (!v.is_string()) {
    throw ParseError(std::string("key \"") + key + "\" must be a string",
                     line_no);
  }
  std::string s = v.get<std::string>();
  if (s.empty()) {
    throw ParseError(std::string("key \"") + key + "\" must be non-empty",
                     line_no);
  }
  return s;
}

template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open dataset: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(line, line_no);
  }
}

void write_lines(const std::string& path, const std::vector<json>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open dataset for write: " + path);
  for (const auto& row : rows) out << row.dump() << '\n';
}

}  // namespace

std::vector<TripletExample> load_triplets(const std::string& path) {
  std::vector<TripletExample> out;
  for_each_line(path, [&](const std::string& line, std::size_t n) {
    json j = parse_line(line, n, {"anchor", "positive", "negative"});
    out.push_back({string_field(j, "anchor", n),
                   string_field(j, "positive", n),
                   string_field(j, "negative", n)});
  });
  return out;
}

std::vector<ScoredPair> load_scored_pairs(const std::string& path) {
  std::vector<ScoredPair> out;
  for_each_line(path, [&](const std::string& line, std::size_t n) {
    json j = parse_line(line, n, {"sentence1", "sentence2", "score"});
    const auto& s = j.at("score");
    if (!s.is_number()) {
      throw ParseError("key \"score\" must be a number", n);
    }
    const double score = s.get<double>();
    if (score < 0.0 || score > 5.0) {
      throw ParseError("score " + std::to_string(score) +
                           " outside [0, 5]", n);
    }
    out.push_back({string_field(j, "sentence1", n),
                   string_field(j, "sentence2", n), score});
  });
  return out;
}

std::vector<LabeledText> load_labeled(const std::string& path) {
  std::vector<LabeledText> out;
  for_each_line(path, [&](const std::string& line, std::size_t n) {
    json j = parse_line(line, n, {"text", "label"});
    out.push_back({string_field(j, "text", n), string_field(j, "label", n)});
  });
  return out;
}

std::vector<std::pair<std::string, std::string>> load_sentence_pairs(
    const std::string& path) {
  std::vector<std::pair<std::string, std::string>> out;
  for_each_line(path, [&](const std::string& line, std::size_t n) {
    json j = parse_line(line, n, {"sentence1", "sentence2"});
    out.emplace_back(string_field(j, "sentence1", n),
                     string_field(j, "sentence2", n));
  });
  return out;
}

void save_triplets(const std::vector<TripletExample>& records,
                   const std::string& path) {
  std::vector<json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) {
    rows.push_back(json{{"anchor", r.anchor},
                        {"negative", r.negative},
                        {"positive", r.positive}});
  }
  write_lines(path, rows);
}

void save_scored_pairs(const std::vector<ScoredPair>& records,
                       const std::string& path) {
  std::vector<json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) {
    rows.push_back(json{{"score", r.score},
                        {"sentence1", r.sentence1},
                        {"sentence2", r.sentence2}});
  }
  write_lines(path, rows);
}

void save_labeled(const std::vector<LabeledText>& records,
                  const std::string& path) {
  std::vector<json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) {
    rows.push_back(json{{"label", r.label}, {"text", r.text}});
  }
  write_lines(path, rows);
}

// --- synthetic data ------------------------------------------------------------

void SynthSpec::validate() const {
  std::string problems;
  auto complain = [&](const std::string& p) {
    if (!problems.empty()) problems += "; ";
    problems += p;
  };
  if (topics < 2) complain("topics must be >= 2");
  if (words_per_topic < 2) complain("words_per_topic must be >= 2");
  if (sentence_len < 1) complain("sentence_len must be >= 1");
  if (triplet_count < 1) complain("triplet_count must be >= 1");
  if (pair_count < 1) complain("pair_count must be >= 1");
  if (labeled_count < 3) complain("labeled_count must be >= 3");
  if (labeled_train_fraction <= 0.0 || labeled_val_fraction <= 0.0 ||
      labeled_train_fraction + labeled_val_fraction >= 1.0) {
    complain("labeled split fractions must be positive and sum below 1");
  }
  if (!problems.empty()) {
    throw ConfigError("invalid synth spec: " + problems);
  }
}

namespace {

// Topic words are plain alphanumerics so they survive tokenization intact.
std::string topic_word(std::size_t topic, std::size_t index) {
  return "t" + std::to_string(topic) + "w" + std::to_string(index);
}

std::string sentence_from(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

std::vector<std::string> random_sentence_words(std::size_t topic,
                                               const SynthSpec& spec,
                                               Rng& rng) {
  std::vector<std::string> words(spec.sentence_len);
  for (auto& w : words) {
    w = topic_word(topic, rng.index(spec.words_per_topic));
  }
  return words;
}

double jaccard(const std::vector<std::string>& a,
               const std::vector<std::string>& b) {
  std::set<std::string> sa(a.begin(), a.end());
  std::set<std::string> sb(b.begin(), b.end());
  std::size_t inter = 0;
  for (const auto& w : sa) inter += sb.count(w);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

// gold = 5 * Jaccard, binned to 0.5 steps
double binned_gold(double j) { return std::round(j * 10.0) / 2.0; }

}  // namespace

SynthData synth_generate(const SynthSpec& spec) {
  spec.validate();
  SynthData out;

  {
    Rng rng(Rng::derive(spec.seed, 1));
    out.triplets.reserve(spec.triplet_count);
    for (std::size_t i = 0; i < spec.triplet_count; ++i) {
      const std::size_t topic = rng.index(spec.topics);
      std::size_t other = rng.index(spec.topics - 1);
      if (other >= topic) ++other;
      out.triplets.push_back(
          {sentence_from(random_sentence_words(topic, spec, rng)),
           sentence_from(random_sentence_words(topic, spec, rng)),
           sentence_from(random_sentence_words(other, spec, rng))});
    }
  }

  {
    Rng rng(Rng::derive(spec.seed, 2));
    out.pairs.reserve(spec.pair_count);
    for (std::size_t i = 0; i < spec.pair_count; ++i) {
      const std::size_t topic = rng.index(spec.topics);
      std::vector<std::string> first = random_sentence_words(topic, spec, rng);
      std::vector<std::string> second = first;
      // overwrite a random prefix-sized subset to grade the overlap
      const std::size_t rewrites = rng.index(spec.sentence_len + 1);
      for (std::size_t k = 0; k < rewrites; ++k) {
        const std::size_t pos = rng.index(spec.sentence_len);
        const std::size_t source = rng.index(spec.topics);
        second[pos] = topic_word(source, rng.index(spec.words_per_topic));
      }
      out.pairs.push_back({sentence_from(first), sentence_from(second),
                           binned_gold(jaccard(first, second))});
    }
  }

  {
    Rng rng(Rng::derive(spec.seed, 3));
    std::unordered_set<std::string> seen;
    std::vector<LabeledText> pool;
    pool.reserve(spec.labeled_count);
    std::size_t attempts = 0;
    while (pool.size() < spec.labeled_count) {
      if (++attempts > spec.labeled_count * 200) {
        throw ConfigError(
            "synth_generate: vocabulary too small to draw distinct "
            "labeled sentences");
      }
      const std::size_t topic = rng.index(spec.topics);
      std::string text =
          sentence_from(random_sentence_words(topic, spec, rng));
      if (seen.insert(text).second) {
        pool.push_back({std::move(text), "topic" + std::to_string(topic)});
      }
    }
    const auto train_n = static_cast<std::size_t>(
        std::floor(spec.labeled_train_fraction * pool.size()));
    const auto val_n = static_cast<std::size_t>(
        std::floor(spec.labeled_val_fraction * pool.size()));
    out.labeled.train.assign(pool.begin(), pool.begin() + train_n);
    out.labeled.validation.assign(pool.begin() + train_n,
                                  pool.begin() + train_n + val_n);
    out.labeled.test.assign(pool.begin() + train_n + val_n, pool.end());
  }
  return out;
}

}  // namespace sembed
