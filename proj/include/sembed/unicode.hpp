#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sembed::uni {

// Strict UTF-8 decode: rejects overlong forms, surrogates, values past
// U+10FFFF and truncated sequences. Throws InputError on invalid input.
std::vector<uint32_t> decode_utf8(const std::string& text);
std::string encode_utf8(const std::vector<uint32_t>& codepoints);
bool is_valid_utf8(const std::string& text);

// Canonical composition (NFC) over the generated tables; Hangul handled
// algorithmically.
std::vector<uint32_t> nfc(const std::vector<uint32_t>& codepoints);
std::string nfc(const std::string& text);

// Simple 1:1 lowercase mapping from the Unicode database.
uint32_t simple_lower(uint32_t cp);

bool is_whitespace(uint32_t cp);
// True for general categories Pc, Pd, Ps, Pe, Pi, Pf, Po.
bool is_punctuation(uint32_t cp);

uint8_t combining_class(uint32_t cp);

}  // namespace sembed::uni
