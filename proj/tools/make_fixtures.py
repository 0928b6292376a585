#!/usr/bin/env python3
"""Writes the synthetic fixture world used by the CLI, end-to-end and acceptance tests.

Everything is seeded; rerunning reproduces the files byte for byte.

Usage: make_fixtures.py <target_words.tsv> <out_dir>
"""
import csv
import io
import json
import random
import re
import sys
from pathlib import Path

PROMPTS = {
    "preschool": "Write a story for a preschooler containing the following words: {words}",
    "3yo": "Write a story for a 3-year-old containing the following words: {words}",
    "4yo": "Write a story for a 4-year-old containing the following words: {words}",
    "5yo": "Write a story for a 5-year-old containing the following words: {words}",
    "child": "Write a children's story containing the following words: {words}",
}
SYNONYM_HEADS = ["Name a simpler synonym", "Name two simpler synonyms", "Name three simpler synonyms"]
NAMES = ["Sam", "Lily", "Max", "Nora", "Ben", "Mia"]

# word: (aoa, concreteness, pos)
SIMPLE = {
    "a": (2.9, 1.5, "Article"), "an": (3.1, 1.5, "Article"), "all": (3.5, 1.9, "Determiner"), "and": (3.2, 1.5, "Conjunction"),
    "at": (3.4, 1.6, "Preposition"), "ball": (2.5, 4.9, "Noun"), "bed": (2.7, 5.0, "Noun"),
    "big": (3.0, 3.2, "Adjective"), "bird": (3.2, 5.0, "Noun"), "box": (3.5, 4.9, "Noun"),
    "cat": (2.6, 5.0, "Noun"), "day": (3.6, 3.6, "Noun"), "dog": (2.5, 5.0, "Noun"),
    "every": (4.4, 1.9, "Determiner"), "felt": (4.8, 2.4, "Verb"), "found": (3.9, 2.9, "Verb"),
    "friend": (4.1, 3.9, "Noun"), "fun": (4.0, 2.6, "Noun"), "garden": (4.8, 4.8, "Noun"),
    "had": (3.3, 1.9, "Verb"), "happy": (3.5, 2.6, "Adjective"), "home": (3.3, 4.3, "Noun"),
    "house": (3.1, 5.0, "Noun"), "in": (2.9, 1.9, "Preposition"), "it": (3.1, 1.6, "Pronoun"),
    "like": (3.5, 2.0, "Verb"), "little": (3.4, 2.9, "Adjective"), "looked": (3.8, 3.6, "Verb"),
    "mom": (2.2, 4.6, "Noun"), "park": (4.1, 4.9, "Noun"), "said": (3.8, 2.5, "Verb"),
    "saw": (3.6, 3.4, "Verb"), "slept": (4.3, 3.8, "Verb"), "so": (4.2, 1.5, "Adverb"),
    "the": (3.0, 1.4, "Article"), "then": (4.3, 1.6, "Adverb"), "they": (3.9, 2.0, "Pronoun"),
    "to": (3.3, 1.4, "Preposition"), "today": (4.4, 2.9, "Adverb"), "together": (4.9, 2.4, "Adverb"),
    "toy": (2.8, 4.9, "Noun"), "tree": (3.0, 5.0, "Noun"), "very": (4.0, 1.5, "Adverb"),
    "was": (3.5, 1.7, "Verb"), "went": (3.8, 2.6, "Verb"), "wanted": (4.5, 2.1, "Verb"),
    "will": (4.2, 1.7, "Verb"), "with": (3.6, 1.6, "Preposition"), "played": (3.3, 3.5, "Verb"),
    "sun": (3.2, 5.0, "Noun"), "under": (4.2, 2.6, "Preposition"), "near": (4.9, 2.3, "Preposition"),
    "window": (4.5, 5.0, "Noun"), "hill": (4.7, 4.9, "Noun"), "cake": (3.4, 5.0, "Noun"),
}

# complex words kept out of every target list, with the simpler words that replace them
COMPLEX = {
    "enormous": (7.8, 2.9, "Adjective"), "magnificent": (9.5, 2.4, "Adjective"),
    "peculiar": (10.2, 2.0, "Adjective"), "ancient": (9.6, 2.9, "Adjective"),
    "gigantic": (7.4, 3.1, "Adjective"), "glimmering": (10.5, 3.4, "Adjective"),
    "frightened": (6.9, 2.6, "Adjective"), "exhausted": (9.0, 2.7, "Adjective"),
    "delighted": (8.4, 2.3, "Adjective"), "curious": (7.6, 2.0, "Adjective"),
    "terrified": (8.0, 2.7, "Adjective"), "furious": (8.8, 2.6, "Adjective"),
    "discovered": (8.2, 2.4, "Verb"),
}
SUBSTITUTES = {
    "huge": (5.0, 3.2, "Adjective"), "large": (5.1, 3.3, "Adjective"), "great": (4.6, 2.0, "Adjective"),
    "grand": (6.8, 2.2, "Adjective"), "wonderful": (5.9, 1.9, "Adjective"), "splendid": (10.8, 1.9, "Adjective"),
    "strange": (6.1, 2.0, "Adjective"), "odd": (5.5, 2.0, "Adjective"), "weird": (5.8, 2.0, "Adjective"),
    "old": (3.5, 3.0, "Adjective"), "antique": (10.1, 4.2, "Adjective"), "modern": (9.9, 2.4, "Adjective"),
    "shiny": (5.2, 4.0, "Adjective"), "bright": (5.4, 3.6, "Adjective"), "sparkly": (6.3, 3.9, "Adjective"),
    "glowing": (7.1, 3.8, "Adjective"), "scared": (4.2, 2.7, "Adjective"), "afraid": (5.1, 2.3, "Adjective"),
    "brave": (6.0, 2.0, "Adjective"), "tired": (3.8, 3.0, "Adjective"), "sleepy": (4.1, 3.4, "Adjective"),
    "energetic": (9.5, 2.2, "Adjective"), "glad": (5.0, 2.0, "Adjective"), "pleased": (6.4, 2.1, "Adjective"),
    "sad": (3.6, 2.3, "Adjective"), "interested": (7.0, 1.9, "Adjective"), "nosy": (8.2, 2.5, "Adjective"),
    "inquisitive": (12.0, 1.6, "Adjective"), "spotted": (6.0, 3.5, "Verb"), "angry": (4.5, 2.5, "Adjective"),
    "mad": (4.6, 2.4, "Adjective"), "calm": (6.2, 2.3, "Adjective"), "tiny": (4.4, 3.5, "Adjective"),
    "massive": (8.5, 3.0, "Adjective"), "frighten": (7.2, 2.5, "Verb"), "discover": (8.0, 2.3, "Verb"),
}
# candidate rows for the target-word band filter
DISTRACTORS = [
    ("ice cream", 4.1, 5.0, "Noun"), ("freedom", 8.9, 1.8, "Noun"), ("quickly", 6.5, 2.0, "Adverb"),
    ("idea", 7.4, 1.6, "Noun"), ("submarine", 10.3, 4.9, "Noun"), ("kitten", 3.2, 5.0, "Noun"),
    ("kittens", 3.6, 5.0, "Noun"), ("igloo", 7.7, 4.9, "Noun"), ("igloos", 8.1, 4.9, "Noun"),
]

THESAURUS = {
    "enormous": ["big", "huge", "gigantic", "tiny", "massive"],
    "magnificent": ["great", "grand", "splendid", "wonderful"],
    "peculiar": ["strange", "odd", "weird", "odd-ish"],
    "ancient": ["old", "antique", "modern"],
    "gigantic": ["big", "huge", "large"],
    "glimmering": ["shiny", "bright", "sparkly", "glowing"],
    "frightened": ["scared", "afraid", "brave", "frighten"],
    "exhausted": ["tired", "sleepy", "energetic"],
    "delighted": ["happy", "glad", "pleased", "sad"],
    "curious": ["interested", "nosy", "inquisitive"],
    "terrified": ["scared", "afraid", "frightened"],
    "furious": ["angry", "mad", "calm"],
    "discover": ["find", "spot", "discover"],
    "discovered": ["found", "spotted", "discover"],
}
ANTONYMS = {
    "enormous": ["tiny"], "ancient": ["modern"], "frightened": ["brave"], "exhausted": ["energetic"],
    "delighted": ["sad"], "furious": ["calm"], "happy": ["sad"], "big": ["little"],
}
LLM_ANSWERS = {
    "enormous": ["huge", "massive", "big"],
    "magnificent": ["wonderful", "great", "splendid"],
    "peculiar": ["weird", "strange", "unusual"],
    "ancient": ["old", "antique", "aged"],
    "gigantic": ["huge", "enormous", "big"],
    "glimmering": ["sparkly", "shiny", "shimmering"],
    "frightened": ["scared", "afraid", "fearful"],
    "exhausted": ["tired", "worn out", "sleepy"],
    "delighted": ["happy", "pleased", "glad"],
    "curious": ["interested", "nosy", "eager"],
    "terrified": ["scared", "afraid", "frightened"],
    "furious": ["angry", "mad", "cross"],
    "discovered": ["found", "spotted", "discover"],
}
GOLD = {
    "enormous": ["big", "huge", "large"], "magnificent": ["great", "wonderful"],
    "peculiar": ["strange", "odd", "weird"], "ancient": ["old"],
    "gigantic": ["huge", "big"], "glimmering": ["shiny", "bright"],
    "frightened": ["scared", "afraid"], "exhausted": ["tired", "sleepy"],
    "delighted": ["happy", "glad"], "curious": ["interested"],
    "terrified": ["scared", "afraid"], "furious": ["angry", "mad"],
    "discovered": ["found", "spotted"],
}
EXTRA = {"find": (3.9, 2.9, "Verb"), "spot": (5.3, 3.4, "Verb"), "fearful": (7.9, 2.3, "Adjective"),
         "cross": (5.6, 3.0, "Adjective"), "aged": (8.3, 2.6, "Adjective")}

ADJ_FRAMES = ["The {noun} was {w}.", "They saw a {w} {noun}."]
FEEL_FRAMES = ["{name} felt {w}.", "{name} was very {w}."]
FEELINGS = {"frightened", "exhausted", "delighted", "curious", "terrified", "furious"}
NOUN_FRAMES = ["{name} saw a {w} in the park.", "They found a {w} near the house.",
               "Mom said the {w} was very big.", "{name} had a {w} in a box."]
ADJ_TARGET_FRAMES = ["The {noun} was very {w}.", "It was a {w} day.", "They saw a {w} hill."]
VERB_FRAMES = ["They will {w} today.", "{name} wanted to {w} with a friend.", "They like to {w} together."]
PLAIN_NOUNS = ["dog", "cat", "bird", "tree", "ball", "toy", "cake", "box", "house", "garden", "window", "hill"]


def third_person(verb):
    if re.search(r"(s|x|z|ch|sh)$", verb):
        return verb + "es"
    return verb + "s"


def load_targets(path):
    rows = []
    with open(path, encoding="utf-8") as f:
        next(f)
        for line in f:
            word, pos = line.rstrip("\n").split("\t")
            rows.append((word, pos))
    return rows


def target_attributes(targets):
    rng = random.Random(61)
    attrs = {}
    for word, pos in targets:
        aoa = round(rng.uniform(6.0, 9.0), 2)
        conc = round(rng.uniform(3.5, 5.0), 2)
        attrs[word] = (aoa, conc, pos.capitalize())
    return attrs


def draw_sets(targets, rng, count, taken):
    by_pos = {}
    for word, pos in targets:
        if word not in taken:
            by_pos.setdefault(pos, []).append(word)
    sets = []
    for _ in range(count):
        picks = rng.sample(by_pos["noun"], 3) + rng.sample(by_pos["adjective"], 1) + rng.sample(by_pos["verb"], 1)
        for w in picks:
            for pool in by_pos.values():
                if w in pool:
                    pool.remove(w)
        rng.shuffle(picks)
        sets.append(picks)
        taken.update(picks)
    return sets


def story_text(model, prompt_id, set_idx, targets, pos_of, complex_words, omit=None, inflect=False):
    rng = random.Random(f"{model}|{prompt_id}|{set_idx}")
    name = rng.choice(NAMES)
    sentences = [f"{name} had a little {rng.choice(PLAIN_NOUNS)}."]
    body = []
    for w in targets:
        if w == omit:
            continue
        pos = pos_of[w]
        if pos == "verb":
            if inflect:
                body.append(f"{name} {third_person(w)} every day.")
            else:
                body.append(rng.choice(VERB_FRAMES).format(w=w, name=name))
        elif pos == "adjective":
            body.append(rng.choice(ADJ_TARGET_FRAMES).format(w=w, noun=rng.choice(PLAIN_NOUNS)))
        else:
            body.append(rng.choice(NOUN_FRAMES).format(w=w, name=name))
    for c in complex_words:
        if c == "discovered":
            body.append(f"{name} discovered a {rng.choice(PLAIN_NOUNS)}.")
        elif c in FEELINGS:
            body.append(rng.choice(FEEL_FRAMES).format(w=c, name=name))
        else:
            body.append(rng.choice(ADJ_FRAMES).format(w=c, noun=rng.choice(PLAIN_NOUNS)))
    rng.shuffle(body)
    sentences += body
    if model == "beta":
        sentences.append(f"Then they went home together and {name} slept in the little bed.")
    else:
        sentences.append("Then they went home.")
    return re.sub(r"\b([Aa]) (?=[aeiou])", r"\1n ", " ".join(sentences))


def split_sentences(text):
    out = []
    pos = 0
    for m in re.finditer(r"(?<=[.!?]) +(?=[A-Z])", text):
        out.append((pos, text[pos:m.start()]))
        pos = m.end()
    out.append((pos, text[pos:]))
    return out


def complex_spans(text, lexicon, exempt):
    spans = []
    for s_idx, (s_begin, sentence) in enumerate(split_sentences(text)):
        seen = set()
        for m in re.finditer(r"[A-Za-z]+", sentence):
            w = m.group(0).lower()
            entry = lexicon.get(w)
            if entry is None or entry[0] <= 6.0 or w in exempt or w in seen:
                continue
            seen.add(w)
            spans.append({"sentence": sentence, "word": m.group(0), "doc_offset": s_begin + m.start()})
    return spans


def cds_escape(s):
    return s.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")


def main(argv):
    if len(argv) != 3:
        sys.exit(__doc__)
    targets = load_targets(argv[1])
    out = Path(argv[2])
    out.mkdir(parents=True, exist_ok=True)
    pos_of = dict(targets)
    tattrs = target_attributes(targets)

    lexicon = {}
    for table in (SIMPLE, COMPLEX, SUBSTITUTES, EXTRA, tattrs):
        for w, v in table.items():
            lexicon.setdefault(w, v)
    for w, aoa, conc, pos in DISTRACTORS:
        lexicon.setdefault(w, (aoa, conc, pos))

    rng = random.Random(2024)
    taken = set()
    model_sets = {"alpha": draw_sets(targets, rng, 3, taken), "beta": draw_sets(targets, rng, 3, taken)}
    complex_pool = sorted(COMPLEX)

    stories = []
    for model in ("alpha", "beta"):
        for p_idx, prompt_id in enumerate(PROMPTS):
            for set_idx, tset in enumerate(model_sets[model]):
                srng = random.Random(f"complex|{model}|{prompt_id}|{set_idx}")
                n_complex = 0 if (p_idx + set_idx) % 4 == 0 else 1 + (p_idx + set_idx) % 2
                chosen = srng.sample(complex_pool, n_complex)
                omit = tset[3] if (model == "beta" and prompt_id == "child" and set_idx == 2) or \
                    (model == "alpha" and prompt_id == "5yo" and set_idx == 0) else None
                verb = next(w for w in tset if pos_of[w] == "verb")
                inflect = model == "alpha" and prompt_id == "3yo" and set_idx == 1
                text = story_text(model, prompt_id, set_idx, tset, pos_of, chosen, omit, inflect)
                if model == "beta" and prompt_id == "4yo" and set_idx == 0:
                    text = text.replace("Then they went home", "Then they went home with a wonderful cake")
                stories.append({
                    "id": f"{model}-{prompt_id}-{set_idx:04d}-00", "model": model, "prompt_id": prompt_id,
                    "target_words": tset, "text": text, "meta": {},
                })
                for tok in re.findall(r"[A-Za-z]+", text):
                    low = tok.lower()
                    if low not in lexicon and tok not in NAMES and low != third_person(verb):
                        raise SystemExit(f"{low!r} missing from the fixture lexicon")

    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["Word", "Freq_pm", "AoA_Kup", "Conc.M", "Dom_PoS"])
    frng = random.Random(7)
    for w in sorted(lexicon):
        aoa, conc, pos = lexicon[w]
        wr.writerow([w, f"{frng.uniform(0.5, 400):.2f}", f"{aoa:.2f}", f"{conc:.2f}", pos])
    (out / "lexicon.csv").write_text(buf.getvalue(), encoding="utf-8")

    with open(out / "stories.jsonl", "w", encoding="utf-8") as f:
        for s in stories:
            f.write(json.dumps(s, ensure_ascii=False) + "\n")
    for model, sets in model_sets.items():
        (out / f"sets_{model}.txt").write_text("".join(",".join(s) + "\n" for s in sets), encoding="utf-8")
    (out / "backend_mock.json").write_text(json.dumps(
        {"name": "mock-chat", "kind": "mock", "model": "replay", "replay": "stories.jsonl"}, indent=1) + "\n")

    (out / "synonyms.tsv").write_text("".join(f"{k}\t{','.join(v)}\n" for k, v in sorted(THESAURUS.items())))
    (out / "antonyms.tsv").write_text("".join(f"{k}\t{','.join(v)}\n" for k, v in sorted(ANTONYMS.items())))

    # gold instances: complex spans of every story whose targets are complete
    instances = []
    for s in stories:
        if any(re.search(rf"\b{t}", s["text"], re.I) is None for t in s["target_words"]):
            continue
        for sp in complex_spans(s["text"], lexicon, set(s["target_words"])):
            instances.append((s["id"], sp))
    rows = []
    for i, (sid, sp) in enumerate(instances):
        gold = GOLD[sp["word"].lower()]
        rows.append("\t".join([f"cds{i + 1:04d}", sid, str(sp["doc_offset"]), cds_escape(sp["sentence"]),
                               sp["word"]] + gold))
    (out / "gold.cds.tsv").write_text(
        "# instance_id\tstory_id\tspan_start\tsentence\tcomplex_word\tgold...\n" + "\n".join(rows) + "\n")

    # canned answers for the synonym prompts over every story span and every gold row
    prompts = {}
    for s in stories:
        for sp in complex_spans(s["text"], lexicon, set(s["target_words"])):
            for k in (1, 2, 3):
                answers = LLM_ANSWERS[sp["word"].lower()][:k]
                p = f"{SYNONYM_HEADS[k - 1]} that could replace the word {sp['word']} in the following sentence: {sp['sentence']}"
                prompts[p] = "\n".join(f"{n + 1}. {a.capitalize()}" for n, a in enumerate(answers))
    with open(out / "llm_synonyms.jsonl", "w", encoding="utf-8") as f:
        for p in sorted(prompts):
            f.write(json.dumps({"prompt": p, "response": prompts[p]}, ensure_ascii=False) + "\n")
    (out / "llm_backend.json").write_text(json.dumps(
        {"name": "mock-llm", "kind": "mock", "model": "replay", "replay": "llm_synonyms.jsonl"}, indent=1) + "\n")
    (out / "candidates.json").write_text(json.dumps({
        "candidates": [{"type": "thesaurus", "table": "synonyms.tsv", "name": "thesaurus"},
                       {"type": "llm", "backend": "llm_backend.json"}],
        "antonyms": "antonyms.tsv"}, indent=1) + "\n")

    rrng = random.Random(11)
    with open(out / "ratings.csv", "w", encoding="utf-8") as f:
        f.write("word,annotator,learnability,imageability,appropriateness\n")
        for word, _ in targets[:40] + targets[150:160] + targets[200:210]:
            for ann in ("r1", "r2"):
                f.write(f"{word},{ann},{rrng.randint(1, 5)},{rrng.randint(1, 5)},{rrng.randint(2, 5)}\n")

    (out / "tokens.json").write_text(json.dumps({"tokens": {"tok-ann": "ann", "tok-rev1": "rev1",
                                                            "tok-rev2": "rev2"}}, indent=1) + "\n")
    print(f"{len(lexicon)} lexicon rows, {len(stories)} stories, {len(instances)} gold instances, "
          f"{len(prompts)} synonym prompts")


if __name__ == "__main__":
    main(sys.argv)
