#include "sembed/static_embed.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sembed/errors.hpp"
#include "sembed/tokenizer.hpp"
#include "sembed/unicode.hpp"

namespace sembed {

namespace {

// Splits a line into the leading token and `dim` reals.
std::vector<double> parse_reals(std::istringstream& stream, std::size_t dim,
                                std::size_t line_no) {
  std::vector<double> v;
  v.reserve(dim);
  double x;
  while (stream >> x) v.push_back(x);
  if (v.size() != dim) {
    throw ParseError("expected " + std::to_string(dim) + " reals, got " +
                         std::to_string(v.size()),
                     line_no);
  }
  return v;
}

std::pair<std::size_t, std::size_t> parse_header(std::ifstream& in,
                                                 const std::string& what) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("missing " + what + " header", 1);
  }
  std::istringstream header(line);
  long long count = -1, dim = -1;
  if (!(header >> count >> dim) || count < 0 || dim < 1) {
    throw ParseError("malformed " + what + " header \"" + line + "\"", 1);
  }
  std::string rest;
  if (header >> rest) {
    throw ParseError("trailing content in " + what + " header", 1);
  }
  return {static_cast<std::size_t>(count), static_cast<std::size_t>(dim)};
}

}  // namespace

WordVectorTable load_vectors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open word vectors: " + path);
  auto [count, dim] = parse_header(in, "word-vector");

  WordVectorTable table;
  table.dim = dim;
  table.word_vectors.reserve(count);
  std::string line;
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!uni::is_valid_utf8(line)) {
      throw ParseError("invalid UTF-8", line_no);
    }
    std::istringstream stream(line);
    std::string word;
    stream >> word;
    if (word.empty()) throw ParseError("missing token", line_no);
    std::vector<double> vec = parse_reals(stream, dim, line_no);
    ++rows;
    table.word_vectors.emplace(std::move(word), std::move(vec));  // first wins
  }
  if (rows != count) {
    throw ParseError("header promised " + std::to_string(count) +
                         " rows, file has " + std::to_string(rows),
                     line_no);
  }
  return table;
}

void save_vectors(const WordVectorTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot open word vectors for write: " + path);
  out << table.word_vectors.size() << ' ' << table.dim << '\n';
  // sorted for reproducible output
  std::vector<const std::string*> words;
  words.reserve(table.word_vectors.size());
  for (const auto& [w, v] : table.word_vectors) words.push_back(&w);
  std::sort(words.begin(), words.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  char buf[64];
  for (const std::string* w : words) {
    out << *w;
    for (double x : table.word_vectors.at(*w)) {
      std::snprintf(buf, sizeof(buf), " %.17g", x);
      out << buf;
    }
    out << '\n';
  }
}

void load_buckets(WordVectorTable& table, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open bucket vectors: " + path);
  auto [count, dim] = parse_header(in, "bucket");
  if (dim != table.dim) {
    throw ParseError("bucket dim " + std::to_string(dim) +
                         " does not match table dim " +
                         std::to_string(table.dim),
                     1);
  }
  table.num_buckets = count;
  table.bucket_vectors.assign(count * dim, 0.0);
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream stream(line);
    long long id = -1;
    stream >> id;
    if (id < 0 || static_cast<std::size_t>(id) >= count) {
      throw ParseError("bucket id out of range", line_no);
    }
    std::vector<double> vec = parse_reals(stream, dim, line_no);
    std::copy(vec.begin(), vec.end(),
              table.bucket_vectors.begin() + static_cast<std::size_t>(id) * dim);
  }
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::vector<std::string> char_ngrams(const std::string& word,
                                     std::size_t ngram_min,
                                     std::size_t ngram_max) {
  std::vector<uint32_t> cps = uni::decode_utf8("<" + word + ">");
  std::vector<std::string> out;
  for (std::size_t len = ngram_min; len <= ngram_max; ++len) {
    if (len > cps.size()) break;
    for (std::size_t start = 0; start + len <= cps.size(); ++start) {
      out.push_back(uni::encode_utf8(
          std::vector<uint32_t>(cps.begin() + start, cps.begin() + start + len)));
    }
  }
  return out;
}

std::vector<double> word_vector(const WordVectorTable& table,
                                const std::string& word) {
  auto it = table.word_vectors.find(word);
  if (it != table.word_vectors.end()) return it->second;
  if (!table.has_buckets()) return std::vector<double>(table.dim, 0.0);

  std::vector<double> acc(table.dim, 0.0);
  const auto ngrams = char_ngrams(word, table.ngram_min, table.ngram_max);
  if (ngrams.empty()) return acc;
  for (const auto& gram : ngrams) {
    const std::size_t bucket = fnv1a64(gram) % table.num_buckets;
    for (std::size_t j = 0; j < table.dim; ++j) {
      acc[j] += table.bucket_vectors[bucket * table.dim + j];
    }
  }
  for (double& x : acc) x /= static_cast<double>(ngrams.size());
  return acc;
}

std::vector<double> sentence_embed_avg(const WordVectorTable& table,
                                       const std::string& text) {
  std::vector<double> acc(table.dim, 0.0);
  std::size_t contributing = 0;
  for (const auto& token : tokenize(text)) {
    std::vector<double> v = word_vector(table, token);
    bool nonzero = false;
    for (double x : v) {
      if (x != 0.0) {
        nonzero = true;
        break;
      }
    }
    if (!nonzero) continue;  // zero vectors stay out of the denominator
    ++contributing;
    for (std::size_t j = 0; j < table.dim; ++j) acc[j] += v[j];
  }
  if (contributing > 0) {
    for (double& x : acc) x /= static_cast<double>(contributing);
  }
  return acc;
}

}  // namespace sembed
