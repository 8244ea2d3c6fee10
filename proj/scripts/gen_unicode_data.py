#!/usr/bin/env python3
"""Regenerates src/unicode_data.cpp from Python's unicodedata module.

Emits category range tables (letters, marks, numbers, whitespace), canonical
combining classes, canonical decompositions and primary composition pairs.
Hangul syllables are handled algorithmically at runtime and are excluded
from the emitted tables.

Usage: python3 scripts/gen_unicode_data.py > src/unicode_data.cpp
"""

import sys
import unicodedata

MAX_CP = 0x110000
HANGUL_S_BASE = 0xAC00
HANGUL_S_COUNT = 11172


def is_hangul_syllable(cp: int) -> bool:
    return HANGUL_S_BASE <= cp < HANGUL_S_BASE + HANGUL_S_COUNT


def ranges_for(pred):
    out = []
    start = None
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF:
            hit = False
        else:
            hit = pred(cp)
        if hit and start is None:
            start = cp
        elif not hit and start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, MAX_CP - 1))
    return out


def category(cp: int) -> str:
    return unicodedata.category(chr(cp))


def canonical_decomposition(cp: int):
    """Raw canonical decomposition (no compatibility tags), or None."""
    d = unicodedata.decomposition(chr(cp))
    if not d or d.startswith("<"):
        return None
    parts = [int(p, 16) for p in d.split()]
    if len(parts) > 2:
        raise RuntimeError(f"canonical decomposition longer than 2 at U+{cp:04X}")
    return parts


def main() -> None:
    letters = ranges_for(lambda cp: category(cp).startswith("L"))
    marks = ranges_for(lambda cp: category(cp).startswith("M"))
    numbers = ranges_for(lambda cp: category(cp).startswith("N"))
    spaces = ranges_for(lambda cp: chr(cp).isspace())

    ccc = []
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        c = unicodedata.combining(chr(cp))
        if c:
            ccc.append((cp, c))

    decomp = []
    comp = []
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF or is_hangul_syllable(cp):
            continue
        parts = canonical_decomposition(cp)
        if parts is None:
            continue
        a = parts[0]
        b = parts[1] if len(parts) == 2 else 0
        decomp.append((cp, a, b))
        # A pair participates in composition iff NFC recomposes it. This
        # folds in the composition exclusions without carrying the list.
        if b and unicodedata.normalize("NFC", chr(a) + chr(b)) == chr(cp):
            comp.append((a, b, cp))
    comp.sort(key=lambda t: (t[0], t[1]))

    w = sys.stdout.write
    w("// Generated by scripts/gen_unicode_data.py from Python unicodedata "
      f"(UCD {unicodedata.unidata_version}). Do not edit.\n")
    w('#include "unicode_data.hpp"\n\n')
    w("namespace tokgraft::uni::data {\n\n")

    def emit_ranges(name, rs):
        w(f"const CpRange {name}[] = {{\n")
        for i in range(0, len(rs), 6):
            row = ", ".join(f"{{0x{a:X}, 0x{b:X}}}" for a, b in rs[i:i + 6])
            w(f"    {row},\n")
        w("};\n")
        w(f"const std::size_t {name}_count = {len(rs)};\n\n")

    emit_ranges("letter_ranges", letters)
    emit_ranges("mark_ranges", marks)
    emit_ranges("number_ranges", numbers)
    emit_ranges("space_ranges", spaces)

    w("const CombiningClass combining_classes[] = {\n")
    for i in range(0, len(ccc), 6):
        row = ", ".join(f"{{0x{cp:X}, {c}}}" for cp, c in ccc[i:i + 6])
        w(f"    {row},\n")
    w("};\n")
    w(f"const std::size_t combining_classes_count = {len(ccc)};\n\n")

    w("const Decomposition decompositions[] = {\n")
    for i in range(0, len(decomp), 4):
        row = ", ".join(f"{{0x{cp:X}, 0x{a:X}, 0x{b:X}}}" for cp, a, b in decomp[i:i + 4])
        w(f"    {row},\n")
    w("};\n")
    w(f"const std::size_t decompositions_count = {len(decomp)};\n\n")

    w("const CompositionPair composition_pairs[] = {\n")
    for i in range(0, len(comp), 4):
        row = ", ".join(f"{{0x{a:X}, 0x{b:X}, 0x{c:X}}}" for a, b, c in comp[i:i + 4])
        w(f"    {row},\n")
    w("};\n")
    w(f"const std::size_t composition_pairs_count = {len(comp)};\n\n")

    w("}  // namespace tokgraft::uni::data\n")


if __name__ == "__main__":
    main()
