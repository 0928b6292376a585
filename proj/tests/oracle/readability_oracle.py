#!/usr/bin/env python3
"""Reference readability calculator used to freeze expected scores.

Written from the documented text-processing rules only:
  * words are maximal runs of letters and apostrophes; hyphens split compounds;
    digit runs are number tokens (words for the formulas, one syllable per digit)
  * a sentence ends at a run of . ! ? (optionally followed by closing quotes or
    brackets) when whitespace and then an uppercase letter (optionally after an
    opening quote or bracket) follow, or at end of text; a blank line also ends a
    sentence; Mr. Mrs. Dr. St. never end one
  * syllables: bundled dictionary first, else vowel groups (a e i o u y) minus a
    silent final e (kept for consonant + le), minimum 1
  * hard word: >= 3 syllables, not capitalized mid-sentence, and not a 2-syllable
    stem pushed to 3 by -ed / -es
  * ARI characters are the alphanumeric characters of word and number tokens

Usage: readability_oracle.py <docs.json> <syllables.tsv> <out.json>
"""
import json
import re
import sys

ABBREVIATIONS = {"mr", "mrs", "dr", "st"}
APOSTROPHES = "'’ʼ"
CLOSERS = "\"')]}”’"
OPENERS = "\"'([{“‘"
VOWELS = set("aeiouy")


def load_dictionary(path):
    table = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            word, count = line.rstrip("\n").split("\t")
            table[word] = int(count)
    return table


def heuristic(word):
    groups = 0
    prev = False
    for ch in word:
        v = ch in VOWELS
        if v and not prev:
            groups += 1
        prev = v
    if word.endswith("e"):
        keeps = word.endswith("le") and len(word) >= 3 and word[-3].isalpha() and word[-3] not in VOWELS
        if not keeps:
            groups -= 1
    return max(1, groups)


def syllables(norm, dictionary):
    return dictionary.get(norm) or heuristic(norm)


def is_letter(ch):
    return ch.isalpha()


def tokens_of(text):
    """Yields (kind, surface, start) with kind in {word, number}."""
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if is_letter(ch) or (ch in APOSTROPHES and i + 1 < n and is_letter(text[i + 1]) and
                             i > 0 and is_letter(text[i - 1])):
            j = i
            while j < n and (is_letter(text[j]) or (text[j] in APOSTROPHES and j + 1 < n and is_letter(text[j + 1]))):
                j += 1
            yield ("word", text[i:j], i)
            i = j
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            yield ("number", text[i:j], i)
            i = j
        else:
            i += 1


def boundaries(text):
    """Character offsets at which a new sentence starts."""
    cuts = set()
    n = len(text)
    i = 0
    while i < n:
        if text[i] in ".!?":
            j = i
            while j < n and text[j] in ".!?":
                j += 1
            term_end = j
            while j < n and text[j] in CLOSERS:
                j += 1
            k = j
            while k < n and text[k].isspace():
                k += 1
            had_space = k > j
            m = k
            while m < n and text[m] in OPENERS:
                m += 1
            prev_word = re.search(r"([A-Za-z]+)$", text[:i])
            abbreviation = (term_end - i == 1 and text[i] == "." and prev_word is not None and
                            prev_word.group(1).lower() in ABBREVIATIONS)
            if not abbreviation and (k >= n or (had_space and m < n and text[m].isupper())):
                cuts.add(k)
            i = term_end
            continue
        i += 1
    for m in re.finditer(r"\n[ \t]*\n", text):
        cuts.add(m.end())
    return sorted(cuts)


def analyse(text, dictionary):
    cuts = boundaries(text)
    toks = list(tokens_of(text))
    sentence_of = []
    for _, _, start in toks:
        sentence_of.append(sum(1 for c in cuts if c <= start))
    sentences = len(set(sentence_of))
    words = len(toks)
    syl = 0
    chars = 0
    hard = 0
    seen_sentence = set()
    for (kind, surface, _), sidx in zip(toks, sentence_of):
        initial = sidx not in seen_sentence
        seen_sentence.add(sidx)
        chars += sum(1 for c in surface if c.isalnum())
        if kind == "number":
            syl += len(surface)
            continue
        norm = "".join(c for c in surface.lower() if c.isalpha())
        s = syllables(norm, dictionary)
        syl += s
        if s < 3:
            continue
        if surface[0].isupper() and not initial:
            continue
        if s == 3 and (norm.endswith("ed") or norm.endswith("es")):
            stems = [norm[:-2], norm[:-1]]
            if any(stem and syllables(stem, dictionary) == 2 for stem in stems):
                continue
        hard += 1
    return {"words": words, "sentences": sentences, "syllables": syl, "characters": chars, "hard_words": hard}


def scores(st):
    w, s = st["words"], st["sentences"]
    asl = w / s
    asw = st["syllables"] / w
    return {
        "fre": 206.835 - 1.015 * asl - 84.6 * asw,
        "fkgl": 0.39 * asl + 11.8 * asw - 15.59,
        "gfi": 0.4 * (asl + 100.0 * st["hard_words"] / w),
        "ari": 4.71 * (st["characters"] / w) + 0.5 * asl - 21.43,
    }


def main(argv):
    if len(argv) != 4:
        sys.exit(__doc__)
    docs = json.load(open(argv[1], encoding="utf-8"))
    dictionary = load_dictionary(argv[2])
    out = []
    for d in docs:
        st = analyse(d["text"], dictionary)
        out.append({"id": d["id"], "stats": st, "scores": scores(st)})
    with open(argv[3], "w", encoding="utf-8") as f:
        json.dump(out, f, indent=1)
        f.write("\n")
    for r in out:
        print(r["id"], r["stats"], {k: round(v, 4) for k, v in r["scores"].items()})


if __name__ == "__main__":
    main(sys.argv)
