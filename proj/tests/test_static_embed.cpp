#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "sembed/errors.hpp"
#include "sembed/rng.hpp"
#include "sembed/static_embed.hpp"

using namespace sembed;

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  out << content;
}

}  // namespace

TEST_CASE("load_vectors parses the header and rows") {
  write_file("wv_ok.txt", "2 3\na 1 0 0\nb 0 1 0\n");
  WordVectorTable t = load_vectors("wv_ok.txt");
  CHECK(t.dim == 3);
  CHECK(t.word_vectors.size() == 2);
  CHECK(t.word_vectors.at("a") == std::vector<double>{1, 0, 0});
  std::remove("wv_ok.txt");
}

TEST_CASE("load_vectors errors carry line numbers") {
  write_file("wv_bad.txt", "2 3\na 1 0 0\nb 0 1\n");
  try {
    load_vectors("wv_bad.txt");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  write_file("wv_hdr.txt", "x y\n");
  CHECK_THROWS_AS(load_vectors("wv_hdr.txt"), ParseError);
  std::remove("wv_bad.txt");
  std::remove("wv_hdr.txt");
}

TEST_CASE("duplicate words keep the first occurrence") {
  write_file("wv_dup.txt", "2 2\nw 1 1\nw 9 9\n");
  WordVectorTable t = load_vectors("wv_dup.txt");
  CHECK(t.word_vectors.at("w") == std::vector<double>{1, 1});
  std::remove("wv_dup.txt");
}

TEST_CASE("a larger table survives a save/load round trip") {
  WordVectorTable t;
  t.dim = 4;
  Rng rng(55);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> v(4);
    for (auto& x : v) x = rng.uniform() * 2.0 - 1.0;
    t.word_vectors.emplace("word" + std::to_string(i), std::move(v));
  }
  save_vectors(t, "wv_big.txt");
  WordVectorTable back = load_vectors("wv_big.txt");
  CHECK(back.dim == t.dim);
  CHECK(back.word_vectors.size() == t.word_vectors.size());
  for (const auto& [w, v] : t.word_vectors) {
    CHECK(back.word_vectors.at(w) == v);
  }
  std::remove("wv_big.txt");
}

TEST_CASE("char_ngrams wraps the word in boundary markers") {
  CHECK(char_ngrams("ab", 3, 3) == std::vector<std::string>{"<ab", "ab>"});
  CHECK(char_ngrams("ab", 3, 4) ==
        std::vector<std::string>{"<ab", "ab>", "<ab>"});
  // multibyte codepoints count as one character
  auto grams = char_ngrams("नम", 3, 3);
  CHECK(grams.size() == 2);
}

TEST_CASE("fnv1a64 matches independently computed values") {
  // computed by hand from the FNV-1a definition
  CHECK(fnv1a64("<ab") == 8075453414040363044ULL);
  CHECK(fnv1a64("ab>") == 16654290638757549756ULL);
  CHECK(fnv1a64("<ab>") == 9625235950682000430ULL);
}

TEST_CASE("word_vector: stored, OOV without buckets, OOV with buckets") {
  WordVectorTable t;
  t.dim = 2;
  t.word_vectors["known"] = {3.0, 4.0};
  CHECK(word_vector(t, "known") == std::vector<double>{3.0, 4.0});
  CHECK(word_vector(t, "mystery") == std::vector<double>{0.0, 0.0});

  t.num_buckets = 7;
  t.ngram_min = 3;
  t.ngram_max = 3;
  t.bucket_vectors.assign(7 * 2, 0.0);
  for (std::size_t b = 0; b < 7; ++b) {
    t.bucket_vectors[b * 2] = static_cast<double>(b);
    t.bucket_vectors[b * 2 + 1] = static_cast<double>(b) * 10.0;
  }
  // "<ab" hashes to bucket 1 and "ab>" to bucket 6 (mod 7, by hand)
  auto v = word_vector(t, "ab");
  CHECK(v[0] == doctest::Approx((1.0 + 6.0) / 2.0));
  CHECK(v[1] == doctest::Approx((10.0 + 60.0) / 2.0));
}

TEST_CASE("bucket file loads against the table dim") {
  write_file("wv.txt", "1 2\nw 1 1\n");
  WordVectorTable t = load_vectors("wv.txt");
  write_file("buckets.txt", "3 2\n0 1 2\n1 3 4\n2 5 6\n");
  load_buckets(t, "buckets.txt");
  CHECK(t.num_buckets == 3);
  CHECK(t.bucket_vectors[2] == 3.0);
  write_file("buckets_bad.txt", "3 5\n");
  CHECK_THROWS_AS(load_buckets(t, "buckets_bad.txt"), ParseError);
  std::remove("wv.txt");
  std::remove("buckets.txt");
  std::remove("buckets_bad.txt");
}

TEST_CASE("sentence averaging: single word, symmetry, hand-computed mean") {
  WordVectorTable t;
  t.dim = 2;
  t.word_vectors["solo"] = {1.0, 2.0};
  CHECK(sentence_embed_avg(t, "solo") == std::vector<double>{1.0, 2.0});

  t.word_vectors["up"] = {1.0, 1.0};
  t.word_vectors["down"] = {-1.0, -1.0};
  CHECK(sentence_embed_avg(t, "up down") == std::vector<double>{0.0, 0.0});

  t.word_vectors["a"] = {1.0, 0.0};
  t.word_vectors["b"] = {0.0, 1.0};
  t.word_vectors["c"] = {2.0, 2.0};
  auto v = sentence_embed_avg(t, "a b c");
  CHECK(v[0] == doctest::Approx(1.0));
  CHECK(v[1] == doctest::Approx(1.0));
}

TEST_CASE("zero-vector tokens stay out of the average denominator") {
  WordVectorTable t;
  t.dim = 1;
  t.word_vectors["real"] = {4.0};
  // "ghost" is OOV with no buckets: zero vector, excluded from the mean
  auto v = sentence_embed_avg(t, "real ghost ghost");
  CHECK(v[0] == doctest::Approx(4.0));
  // nothing contributes: zero vector
  CHECK(sentence_embed_avg(t, "ghost") == std::vector<double>{0.0});
  CHECK(sentence_embed_avg(t, "") == std::vector<double>{0.0});
}

TEST_CASE("sentence averaging is token-order invariant") {
  WordVectorTable t;
  t.dim = 3;
  Rng rng(7);
  for (const char* w : {"p", "q", "r", "s"}) {
    std::vector<double> v(3);
    for (auto& x : v) x = rng.uniform();
    t.word_vectors[w] = v;
  }
  auto a = sentence_embed_avg(t, "p q r s");
  auto b = sentence_embed_avg(t, "s r q p");
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
}

TEST_CASE("mean norm never exceeds the largest token norm") {
  WordVectorTable t;
  t.dim = 2;
  Rng rng(11);
  std::vector<std::string> words;
  double max_norm = 0.0;
  for (int i = 0; i < 6; ++i) {
    std::vector<double> v = {rng.uniform() * 4 - 2, rng.uniform() * 4 - 2};
    max_norm = std::max(max_norm, std::sqrt(v[0] * v[0] + v[1] * v[1]));
    words.push_back("w" + std::to_string(i));
    t.word_vectors[words.back()] = v;
  }
  std::string sentence;
  for (const auto& w : words) sentence += w + " ";
  auto v = sentence_embed_avg(t, sentence);
  CHECK(std::sqrt(v[0] * v[0] + v[1] * v[1]) <= max_norm + 1e-12);
}
