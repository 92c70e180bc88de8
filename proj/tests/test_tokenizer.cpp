#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sembed/errors.hpp"
#include "sembed/rng.hpp"
#include "sembed/tokenizer.hpp"
#include "sembed/unicode.hpp"

using namespace sembed;

namespace {

std::vector<uint32_t> parse_hex_cps(const std::string& s) {
  std::vector<uint32_t> out;
  for (std::size_t i = 0; i + 8 <= s.size(); i += 8) {
    out.push_back(static_cast<uint32_t>(
        std::stoul(s.substr(i, 8), nullptr, 16)));
  }
  return out;
}

}  // namespace

TEST_CASE("nfc matches the golden normalization fixture") {
  std::ifstream in(std::string(SEMBED_GOLDEN_DIR) + "/nfc_cases.txt");
  REQUIRE(in.good());
  std::string line;
  std::size_t cases = 0;
  while (std::getline(in, line)) {
    auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    auto input = parse_hex_cps(line.substr(0, tab));
    auto expected = parse_hex_cps(line.substr(tab + 1));
    CHECK(uni::nfc(input) == expected);
    ++cases;
  }
  CHECK(cases > 300);
}

TEST_CASE("utf8 decode rejects malformed input") {
  CHECK_THROWS_AS(uni::decode_utf8(std::string("\xC0\xAF")), InputError);
  CHECK_THROWS_AS(uni::decode_utf8(std::string("\xE0\x80\x80")), InputError);
  CHECK_THROWS_AS(uni::decode_utf8(std::string("\xF0\x9F")), InputError);
  CHECK_THROWS_AS(uni::decode_utf8(std::string("\xED\xA0\x80")), InputError);
  CHECK(uni::is_valid_utf8("héllo क़"));
  CHECK_FALSE(uni::is_valid_utf8(std::string("\xFF")));
}

TEST_CASE("tokenize basic and empty") {
  CHECK(tokenize("Hello, world") ==
        std::vector<std::string>{"hello", ",", "world"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("   \t\n ").empty());
}

TEST_CASE("tokenize matches hand-tokenized fixtures") {
  struct Fixture {
    std::string input;
    std::vector<std::string> tokens;
  };
  const std::vector<Fixture> fixtures = {
      {"नमस्ते, दुनिया!", {"नमस्ते", ",", "दुनिया", "!"}},
      {"संख्या-प्रणाली", {"संख्या", "-", "प्रणाली"}},
      {"It's A_B (test)।",
       {"it", "'", "s", "a", "_", "b", "(", "test", ")", "।"}},
      // decomposed accents compose under NFC before lowercasing
      {"Café RÉSUMÉ", {"café", "résumé"}},
      // no-break space splits; Greek capital lowers
      {"α Βeta γ", {"α", "βeta", "γ"}},
  };
  for (const auto& f : fixtures) {
    CHECK(tokenize(f.input) == f.tokens);
  }
}

TEST_CASE("build_vocab ranks by frequency then token order") {
  Vocabulary v = build_vocab({"a a b"}, 6);
  CHECK(v.size() == 6);
  CHECK(v.id_of("a") == 4);
  CHECK(v.id_of("b") == 5);
  CHECK(v.id_of("zzz") == kUnkId);

  Vocabulary ties = build_vocab({"x y"}, 8);
  CHECK(ties.id_of("x") < ties.id_of("y"));
}

TEST_CASE("build_vocab truncates by frequency") {
  // 10 distinct tokens with controlled counts; max_size 7 keeps top 3
  std::vector<std::string> corpus = {
      "top top top top", "mid mid mid", "low low",
      "u1 u2 u3 u4 u5 u6 u7"};
  Vocabulary v = build_vocab(corpus, 7);
  CHECK(v.size() == 7);
  CHECK(v.id_of("top") == 4);
  CHECK(v.id_of("mid") == 5);
  CHECK(v.id_of("low") == 6);
  CHECK(v.id_of("u1") == kUnkId);
}

TEST_CASE("build_vocab on empty corpus keeps only reserved ids") {
  Vocabulary v = build_vocab({}, 100);
  CHECK(v.size() == kReservedTokens);
  CHECK(v.id_of("anything") == kUnkId);
}

TEST_CASE("encode_batch basic layout") {
  Vocabulary v = build_vocab({"a b c"}, 10);
  TokenBatch batch = encode_batch({"a"}, v, 16);
  CHECK(batch.batch == 1);
  CHECK(batch.seq_len == 3);
  CHECK(batch.ids == std::vector<int>{kClsId, v.id_of("a"), kSepId});
  CHECK(batch.mask == std::vector<int>{1, 1, 1});
  CHECK(batch.lengths == std::vector<int>{3});
}

TEST_CASE("encode_batch pads shorter rows and keeps mask a prefix") {
  Vocabulary v = build_vocab({"a b c"}, 10);
  TokenBatch batch = encode_batch({"a", "a b c"}, v, 16);
  CHECK(batch.batch == 2);
  CHECK(batch.seq_len == 5);
  // row 0: [CLS] a [SEP] PAD PAD
  CHECK(batch.ids[0] == kClsId);
  CHECK(batch.ids[2] == kSepId);
  CHECK(batch.ids[3] == kPadId);
  CHECK(batch.ids[4] == kPadId);
  for (std::size_t r = 0; r < 2; ++r) {
    bool seen_zero = false;
    for (std::size_t t = 0; t < batch.seq_len; ++t) {
      int m = batch.mask[r * batch.seq_len + t];
      if (m == 0) seen_zero = true;
      if (seen_zero) {
        CHECK(m == 0);
        CHECK(batch.ids[r * batch.seq_len + t] == kPadId);
      }
    }
    // first masked token is [CLS], last is [SEP]
    CHECK(batch.ids[r * batch.seq_len] == kClsId);
    CHECK(batch.ids[r * batch.seq_len + batch.lengths[r] - 1] == kSepId);
  }
}

TEST_CASE("encode_batch truncates the head when text exceeds max_len") {
  Vocabulary v = build_vocab({"t1 t2 t3 t4 t5 t6 t7 t8"}, 20);
  TokenBatch batch = encode_batch({"t1 t2 t3 t4 t5 t6 t7 t8"}, v, 5);
  // exactly max_len-2 = 3 content tokens kept, the earliest ones
  CHECK(batch.seq_len == 5);
  CHECK(batch.lengths[0] == 5);
  CHECK(batch.ids[0] == kClsId);
  CHECK(batch.ids[1] == v.id_of("t1"));
  CHECK(batch.ids[2] == v.id_of("t2"));
  CHECK(batch.ids[3] == v.id_of("t3"));
  CHECK(batch.ids[4] == kSepId);
}

TEST_CASE("encode_batch is deterministic and stable under extra padding") {
  Vocabulary v = build_vocab({"a b c d e"}, 12);
  TokenBatch one = encode_batch({"a b", "c"}, v, 16);
  TokenBatch two = encode_batch({"a b", "c"}, v, 16);
  CHECK(one.ids == two.ids);
  CHECK(one.mask == two.mask);

  // widening the batch with a longer row never changes masked ids
  TokenBatch wide = encode_batch({"a b", "c", "a b c d e"}, v, 16);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t t = 0; t < one.seq_len; ++t) {
      if (one.mask[r * one.seq_len + t]) {
        CHECK(one.ids[r * one.seq_len + t] ==
              wide.ids[r * wide.seq_len + t]);
      }
    }
  }
}

TEST_CASE("nfc is idempotent and tokenize deterministic on random text") {
  Rng rng(271828);
  const std::vector<uint32_t> pool = {
      'a', 'b', 'Z', '9', ' ', '.', ',', '_', 0x00E9, 0x0301, 0x0327,
      0x093C, 0x0915, 0x0958, 0x1100, 0x1161, 0x11A8, 0xAC00, 0x00A0,
      0x2028, 0x0964, 0x03B2, 0x1E63, 0x0307};
  for (int it = 0; it < 300; ++it) {
    std::vector<uint32_t> seq(1 + rng.index(12));
    for (auto& cp : seq) cp = pool[rng.index(pool.size())];
    auto once = uni::nfc(seq);
    CHECK(uni::nfc(once) == once);
    std::string text = uni::encode_utf8(seq);
    CHECK(tokenize(text) == tokenize(text));
  }
}

TEST_CASE("vocabulary file round-trips with implicit reserved ids") {
  Vocabulary v = build_vocab({"alpha beta गामा"}, 10);
  std::string path = "vocab_roundtrip.txt";
  v.save(path);
  Vocabulary loaded = Vocabulary::load(path);
  CHECK(loaded.size() == v.size());
  CHECK(loaded.id_of("alpha") == v.id_of("alpha"));
  CHECK(loaded.id_of("गामा") == v.id_of("गामा"));
  // line number = id - 4
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  CHECK(v.id_of(first) == 4);
  std::remove(path.c_str());
}
