#include "sembed/unicode.hpp"

#include <algorithm>

#include "sembed/errors.hpp"
#include "sembed/unicode_tables.hpp"

namespace sembed::uni {

namespace {

constexpr uint32_t kHangulSBase = 0xAC00;
constexpr uint32_t kHangulLBase = 0x1100;
constexpr uint32_t kHangulVBase = 0x1161;
constexpr uint32_t kHangulTBase = 0x11A7;
constexpr uint32_t kHangulLCount = 19;
constexpr uint32_t kHangulVCount = 21;
constexpr uint32_t kHangulTCount = 28;
constexpr uint32_t kHangulNCount = kHangulVCount * kHangulTCount;
constexpr uint32_t kHangulSCount = kHangulLCount * kHangulNCount;

bool is_hangul_syllable(uint32_t cp) {
  return cp >= kHangulSBase && cp < kHangulSBase + kHangulSCount;
}

const DecompEntry* find_decomp(uint32_t cp) {
  auto it = std::lower_bound(
      std::begin(kDecomp), std::end(kDecomp), cp,
      [](const DecompEntry& e, uint32_t c) { return e.cp < c; });
  if (it != std::end(kDecomp) && it->cp == cp) return &*it;
  return nullptr;
}

// -1 when the pair does not compose.
int64_t compose_pair(uint32_t a, uint32_t b) {
  // Hangul L+V and LV+T
  if (a >= kHangulLBase && a < kHangulLBase + kHangulLCount &&
      b >= kHangulVBase && b < kHangulVBase + kHangulVCount) {
    return kHangulSBase +
           ((a - kHangulLBase) * kHangulVCount + (b - kHangulVBase)) *
               kHangulTCount;
  }
  if (is_hangul_syllable(a) && (a - kHangulSBase) % kHangulTCount == 0 &&
      b > kHangulTBase && b < kHangulTBase + kHangulTCount) {
    return a + (b - kHangulTBase);
  }
  const uint64_t key = (static_cast<uint64_t>(a) << 32) | b;
  auto it = std::lower_bound(
      std::begin(kComp), std::end(kComp), key,
      [](const CompEntry& e, uint64_t k) { return e.key < k; });
  if (it != std::end(kComp) && it->key == key) return it->composite;
  return -1;
}

void decompose_into(uint32_t cp, std::vector<uint32_t>& out) {
  if (is_hangul_syllable(cp)) {
    const uint32_t s = cp - kHangulSBase;
    out.push_back(kHangulLBase + s / kHangulNCount);
    out.push_back(kHangulVBase + (s % kHangulNCount) / kHangulTCount);
    const uint32_t t = s % kHangulTCount;
    if (t != 0) out.push_back(kHangulTBase + t);
    return;
  }
  if (const DecompEntry* e = find_decomp(cp)) {
    for (uint8_t i = 0; i < e->len; ++i) {
      out.push_back(kDecompData[e->offset + i]);
    }
    return;
  }
  out.push_back(cp);
}

}  // namespace

std::vector<uint32_t> decode_utf8(const std::string& text) {
  std::vector<uint32_t> out;
  out.reserve(text.size());
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = s[i];
    uint32_t cp;
    std::size_t len;
    if (c < 0x80) {
      cp = c;
      len = 1;
    } else if ((c & 0xE0) == 0xC0) {
      cp = c & 0x1F;
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      cp = c & 0x0F;
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      cp = c & 0x07;
      len = 4;
    } else {
      throw InputError("invalid UTF-8 lead byte at offset " +
                       std::to_string(i));
    }
    if (i + len > n) {
      throw InputError("truncated UTF-8 sequence at offset " +
                       std::to_string(i));
    }
    for (std::size_t j = 1; j < len; ++j) {
      if ((s[i + j] & 0xC0) != 0x80) {
        throw InputError("invalid UTF-8 continuation at offset " +
                         std::to_string(i + j));
      }
      cp = (cp << 6) | (s[i + j] & 0x3F);
    }
    static constexpr uint32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      throw InputError("invalid UTF-8 scalar value at offset " +
                       std::to_string(i));
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(const std::vector<uint32_t>& codepoints) {
  std::string out;
  out.reserve(codepoints.size());
  for (uint32_t cp : codepoints) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }
  return out;
}

bool is_valid_utf8(const std::string& text) {
  try {
    decode_utf8(text);
    return true;
  } catch (const InputError&) {
    return false;
  }
}

uint8_t combining_class(uint32_t cp) {
  auto it = std::lower_bound(
      std::begin(kCcc), std::end(kCcc), cp,
      [](const CccEntry& e, uint32_t c) { return e.cp < c; });
  if (it != std::end(kCcc) && it->cp == cp) return it->ccc;
  return 0;
}

std::vector<uint32_t> nfc(const std::vector<uint32_t>& codepoints) {
  if (codepoints.empty()) return {};
  // 1. full canonical decomposition
  std::vector<uint32_t> buf;
  buf.reserve(codepoints.size() * 2);
  for (uint32_t cp : codepoints) decompose_into(cp, buf);
  // 2. canonical ordering of combining marks
  for (std::size_t i = 1; i < buf.size(); ++i) {
    const uint8_t cc = combining_class(buf[i]);
    if (cc == 0) continue;
    std::size_t j = i;
    while (j > 0 && combining_class(buf[j - 1]) > cc) {
      std::swap(buf[j - 1], buf[j]);
      --j;
    }
  }
  // 3. canonical composition (UAX #15 sample algorithm)
  std::size_t starter_pos = 0, comp_pos = 1;
  uint32_t starter = buf[0];
  int last_class = combining_class(starter);
  if (last_class != 0) last_class = 256;
  for (std::size_t i = 1; i < buf.size(); ++i) {
    const uint32_t ch = buf[i];
    const int ch_class = combining_class(ch);
    const int64_t composite = compose_pair(starter, ch);
    if (composite >= 0 && (last_class < ch_class || last_class == 0)) {
      buf[starter_pos] = static_cast<uint32_t>(composite);
      starter = static_cast<uint32_t>(composite);
    } else {
      if (ch_class == 0) {
        starter_pos = comp_pos;
        starter = ch;
      }
      last_class = ch_class;
      buf[comp_pos++] = ch;
    }
  }
  buf.resize(comp_pos);
  return buf;
}

std::string nfc(const std::string& text) {
  return encode_utf8(nfc(decode_utf8(text)));
}

uint32_t simple_lower(uint32_t cp) {
  auto it = std::lower_bound(
      std::begin(kSimpleLower), std::end(kSimpleLower), cp,
      [](const CpPair& e, uint32_t c) { return e.cp < c; });
  if (it != std::end(kSimpleLower) && it->cp == cp) return it->mapped;
  return cp;
}

bool is_whitespace(uint32_t cp) {
  return std::binary_search(std::begin(kWhitespace), std::end(kWhitespace),
                            cp);
}

bool is_punctuation(uint32_t cp) {
  auto it = std::upper_bound(
      std::begin(kPunct), std::end(kPunct), cp,
      [](uint32_t c, const CpRange& r) { return c < r.first; });
  if (it == std::begin(kPunct)) return false;
  --it;
  return cp >= it->first && cp <= it->last;
}

}  // namespace sembed::uni
