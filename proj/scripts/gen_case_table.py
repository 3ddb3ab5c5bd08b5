#!/usr/bin/env python3
"""Regenerates src/unicode_case_table.inc.

Emits sorted (codepoint, mapped) pairs for one-to-one case mappings. A
lowercase mapping c->l is kept only when the table's own uppercase mapping
takes l back to c, so that re-uppercasing a lowered character restores the
original. Multi-codepoint mappings are dropped.
"""

import sys

def main(out_path):
    upper = {}
    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        c = chr(cp)
        u = c.upper()
        if len(u) == 1 and u != c:
            upper[cp] = ord(u)

    lower = {}
    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        c = chr(cp)
        l = c.lower()
        if len(l) == 1 and l != c:
            lcp = ord(l)
            if upper.get(lcp, lcp) == cp:
                lower[cp] = lcp

    with open(out_path, "w") as f:
        f.write("// Generated by scripts/gen_case_table.py. Do not edit.\n")
        f.write("static const CasePair kToLower[] = {\n")
        for cp in sorted(lower):
            f.write("    {0x%X, 0x%X},\n" % (cp, lower[cp]))
        f.write("};\n")
        f.write("static const CasePair kToUpper[] = {\n")
        for cp in sorted(upper):
            f.write("    {0x%X, 0x%X},\n" % (cp, upper[cp]))
        f.write("};\n")

if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/unicode_case_table.inc")
