#!/usr/bin/env python3
"""Build data/syllables.tsv (word<TAB>syllables) from a CMUdict wheel or dict file.

Usage: make_syllable_table.py <cmudict.whl|cmudict.dict> <out.tsv> [license-out]
Syllables = vowel phones (those carrying a stress digit) of the first pronunciation.
"""
import re
import sys
import zipfile


def read_dict(src):
    if src.endswith(".whl"):
        with zipfile.ZipFile(src) as z:
            return z.read("cmudict/data/cmudict.dict").decode(), z.read("cmudict/data/LICENSE")
    with open(src, encoding="utf-8") as f:
        return f.read(), None


def main(argv):
    if len(argv) < 3:
        sys.exit(__doc__)
    text, license_bytes = read_dict(argv[1])
    table = {}
    for line in text.splitlines():
        line = line.split("#")[0].strip()
        if not line:
            continue
        word, *phones = line.split()
        if "(" in word:
            continue
        key = word.replace("'", "")
        if not re.fullmatch(r"[a-z]+", key):
            continue
        n = sum(1 for p in phones if p[-1].isdigit())
        if n >= 1:
            table.setdefault(key, n)
    with open(argv[2], "w", encoding="utf-8") as f:
        for k in sorted(table):
            f.write(f"{k}\t{table[k]}\n")
    if len(argv) > 3 and license_bytes is not None:
        with open(argv[3], "wb") as f:
            f.write(license_bytes)
    print(f"{len(table)} entries -> {argv[2]}")


if __name__ == "__main__":
    main(sys.argv)
