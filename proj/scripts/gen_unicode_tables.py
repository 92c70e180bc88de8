#!/usr/bin/env python3
"""Generates include/sembed/unicode_tables.hpp from Python's bundled Unicode
database, plus a normalization fixture for the tokenizer tests.

Run from the repo root:
    python3 scripts/gen_unicode_tables.py
"""

import random
import sys
import unicodedata

MAX_CP = 0x110000
HANGUL_S_BASE = 0xAC00
HANGUL_S_COUNT = 11172

OUT_HEADER = "include/sembed/unicode_tables.hpp"
OUT_FIXTURE = "tests/golden/nfc_cases.txt"


def is_hangul_syllable(cp):
    return HANGUL_S_BASE <= cp < HANGUL_S_BASE + HANGUL_S_COUNT


def gen_simple_lower():
    pairs = []
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        lo = chr(cp).lower()
        if len(lo) == 1 and ord(lo) != cp:
            pairs.append((cp, ord(lo)))
    return pairs


def gen_whitespace():
    # UCD White_Space: categories Zs/Zl/Zp plus the fixed control list.
    ws = {0x09, 0x0A, 0x0B, 0x0C, 0x0D, 0x85}
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        if unicodedata.category(chr(cp)) in ("Zs", "Zl", "Zp"):
            ws.add(cp)
    return sorted(ws)


def gen_punct_ranges():
    cps = []
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        if unicodedata.category(chr(cp)).startswith("P"):
            cps.append(cp)
    ranges = []
    for cp in cps:
        if ranges and cp == ranges[-1][1] + 1:
            ranges[-1][1] = cp
        else:
            ranges.append([cp, cp])
    return ranges


def gen_ccc():
    entries = []
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        c = unicodedata.combining(chr(cp))
        if c != 0:
            entries.append((cp, c))
    return entries


def gen_decomp():
    """Full canonical (NFD) expansions, excluding Hangul (algorithmic)."""
    data = []
    index = []
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF or is_hangul_syllable(cp):
            continue
        nfd = unicodedata.normalize("NFD", chr(cp))
        if len(nfd) == 1 and ord(nfd) == cp:
            continue
        expansion = [ord(c) for c in nfd]
        index.append((cp, len(data), len(expansion)))
        data.extend(expansion)
    return index, data


def gen_comp():
    """Primary composites: (first, second) -> composite, excluding Hangul.

    Built from single-level canonical decompositions; the exclusion check
    (NFC of the NFD must recompose) filters the composition-exclusion set.
    """
    pairs = []
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF or is_hangul_syllable(cp):
            continue
        ch = chr(cp)
        d = unicodedata.decomposition(ch)
        if not d or d.startswith("<"):
            continue
        fields = d.split()
        if len(fields) != 2:
            continue
        if unicodedata.normalize(
                "NFC", unicodedata.normalize("NFD", ch)) != ch:
            continue
        key = (int(fields[0], 16) << 32) | int(fields[1], 16)
        pairs.append((key, cp))
    pairs.sort()
    return pairs


def fmt_rows(items, per_line=8):
    lines = []
    for i in range(0, len(items), per_line):
        lines.append("    " + " ".join(items[i:i + per_line]))
    return "\n".join(lines)


def write_header(path):
    lower = gen_simple_lower()
    ws = gen_whitespace()
    punct = gen_punct_ranges()
    ccc = gen_ccc()
    decomp_index, decomp_data = gen_decomp()
    comp = gen_comp()

    with open(path, "w", encoding="utf-8") as f:
        w = f.write
        w("// Generated by scripts/gen_unicode_tables.py (Unicode %s). Do not edit.\n"
          % unicodedata.unidata_version)
        w("#pragma once\n\n#include <cstdint>\n\nnamespace sembed::uni {\n\n")
        w("struct CpRange { uint32_t first; uint32_t last; };\n")
        w("struct CpPair { uint32_t cp; uint32_t mapped; };\n")
        w("struct CccEntry { uint32_t cp; uint8_t ccc; };\n")
        w("struct DecompEntry { uint32_t cp; uint32_t offset; uint8_t len; };\n")
        w("struct CompEntry { uint64_t key; uint32_t composite; };\n\n")

        w("inline constexpr CpPair kSimpleLower[] = {\n")
        w(fmt_rows(["{0x%X,0x%X}," % p for p in lower]))
        w("\n};\n\n")

        w("inline constexpr uint32_t kWhitespace[] = {\n")
        w(fmt_rows(["0x%X," % c for c in ws]))
        w("\n};\n\n")

        w("inline constexpr CpRange kPunct[] = {\n")
        w(fmt_rows(["{0x%X,0x%X}," % (a, b) for a, b in punct]))
        w("\n};\n\n")

        w("inline constexpr CccEntry kCcc[] = {\n")
        w(fmt_rows(["{0x%X,%d}," % e for e in ccc]))
        w("\n};\n\n")

        w("inline constexpr uint32_t kDecompData[] = {\n")
        w(fmt_rows(["0x%X," % c for c in decomp_data], per_line=12))
        w("\n};\n\n")

        w("inline constexpr DecompEntry kDecomp[] = {\n")
        w(fmt_rows(["{0x%X,%d,%d}," % e for e in decomp_index], per_line=6))
        w("\n};\n\n")

        w("inline constexpr CompEntry kComp[] = {\n")
        w(fmt_rows(["{0x%XULL,0x%X}," % p for p in comp], per_line=6))
        w("\n};\n\n")
        w("}  // namespace sembed::uni\n")

    print("wrote %s: %d lower, %d ws, %d punct ranges, %d ccc, %d decomp (%d cps), %d comp"
          % (path, len(lower), len(ws), len(punct), len(ccc), len(decomp_data),
             len(decomp_index), len(comp)))


def write_fixture(path):
    rng = random.Random(20240131)
    bases = ["a", "e", "o", "n", "s", "A", "O", "क", "न", "र",
             "ㄱ", "ᄀ", "q", "z"]
    marks = ["́", "̀", "̈", "̧", "़", "̣",
             "̄", "̊", "ᅡ", "ᆨ"]
    precomposed = ["é", "Å", "Å", "क़", "फ़", "가",
                   "퓛", "ṩ", "Ǖ", "ΐ"]
    cases = []
    # Deterministic fixed cases first.
    fixed = [
        "é", "é", "á̧", "á̧",
        "क़", "क़", "ख़ग़", "각",
        "각", "ṩ", "q̣̇", "ÅÅ",
        "ABC def", "अंग्रेजी",
    ]
    cases.extend(fixed)
    for _ in range(300):
        n = rng.randint(1, 6)
        s = []
        for _ in range(n):
            k = rng.random()
            if k < 0.4:
                s.append(rng.choice(bases))
            elif k < 0.8:
                s.append(rng.choice(marks))
            else:
                s.append(rng.choice(precomposed))
        cases.append("".join(s))
    with open(path, "w", encoding="utf-8") as f:
        for c in cases:
            nfc = unicodedata.normalize("NFC", c)
            f.write("%s\t%s\n" % (
                "".join("%08X" % ord(ch) for ch in c),
                "".join("%08X" % ord(ch) for ch in nfc)))
    print("wrote %s: %d cases" % (path, len(cases)))


if __name__ == "__main__":
    write_header(OUT_HEADER)
    write_fixture(OUT_FIXTURE)
