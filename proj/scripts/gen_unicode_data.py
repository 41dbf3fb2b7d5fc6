#!/usr/bin/env python3
"""Generates src/unicode_data.inc: canonical decompositions, combining
classes, and primary composites for the NFC normalizer.

Hangul syllables are excluded (handled algorithmically). Pairs are admitted
to the composition table only when NFC actually recomposes them, which bakes
the composition-exclusion rules in without shipping the exclusion list.

Usage: python3 scripts/gen_unicode_data.py > src/unicode_data.inc
"""
import sys
import unicodedata

SBASE, SCOUNT = 0xAC00, 11172


def is_hangul(cp):
    return SBASE <= cp < SBASE + SCOUNT


def main():
    decomp = {}   # cp -> (a,) or (a, b)
    ccc = {}      # cp -> nonzero combining class
    for cp in range(0x110000):
        if is_hangul(cp):
            continue
        ch = chr(cp)
        c = unicodedata.combining(ch)
        if c:
            ccc[cp] = c
        d = unicodedata.decomposition(ch)
        if d and not d.startswith("<"):
            parts = tuple(int(x, 16) for x in d.split())
            assert 1 <= len(parts) <= 2, hex(cp)
            decomp[cp] = parts

    comp = {}     # (a, b) -> cp
    for cp, parts in decomp.items():
        if len(parts) != 2:
            continue
        pair = chr(parts[0]) + chr(parts[1])
        if unicodedata.normalize("NFC", pair) == chr(cp):
            comp[parts] = cp

    out = sys.stdout
    out.write("// Generated by scripts/gen_unicode_data.py (Unicode %s). Do not edit.\n"
              % unicodedata.unidata_version)

    items = sorted(decomp.items())
    out.write("static const UnicodeDecomp kDecomp[] = {\n")
    for cp, parts in items:
        a = parts[0]
        b = parts[1] if len(parts) == 2 else 0xFFFFFFFF
        out.write("  {0x%X, 0x%X, 0x%X},\n" % (cp, a, b))
    out.write("};\n")
    out.write("static const size_t kDecompCount = %d;\n\n" % len(items))

    items = sorted(ccc.items())
    out.write("static const UnicodeCcc kCcc[] = {\n")
    for cp, c in items:
        out.write("  {0x%X, %d},\n" % (cp, c))
    out.write("};\n")
    out.write("static const size_t kCccCount = %d;\n\n" % len(items))

    items = sorted(comp.items())
    out.write("static const UnicodeComp kComp[] = {\n")
    for (a, b), cp in items:
        out.write("  {0x%X, 0x%X, 0x%X},\n" % (a, b, cp))
    out.write("};\n")
    out.write("static const size_t kCompCount = %d;\n" % len(items))


if __name__ == "__main__":
    main()
