#ifndef KIDLEX_TARGETWORDS_HPP
#define KIDLEX_TARGETWORDS_HPP

// Target-word selection: AoA band filter, lexical cleanup, rating aggregation
// and per-POS quota selection. Also loads the bundled 250-word list and draws
// 5-word target sets for generation.

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "kidlex/lexicon.hpp"
#include "kidlex/util.hpp"

namespace kidlex {

struct TargetCandidate {
  std::string lemma;
  std::string pos;  // noun | verb | adjective
  double aoa = 0;
  double concreteness = 0;
  std::vector<int> learnability;
  std::vector<int> imageability;
  std::vector<int> appropriateness;
  friend bool operator==(const TargetCandidate&, const TargetCandidate&) = default;
};

struct BandFilterOptions {
  double lo = 6.0;
  double hi = 9.0;
  double min_concreteness = 3.5;
};

struct BandFilterTrace {
  std::size_t in_band = 0;
  std::size_t dropped_not_single_word = 0;
  std::size_t dropped_adverb = 0;
  std::size_t dropped_multi_pos = 0;
  std::size_t dropped_other_pos = 0;
  std::size_t dropped_concreteness = 0;
  std::size_t dropped_family = 0;
};

namespace detail {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

inline bool candidate_better(const TargetCandidate& a, const TargetCandidate& b) {
  if (a.aoa != b.aoa) return a.aoa < b.aoa;
  return a.lemma < b.lemma;
}

}  // namespace detail

/// Words with lo <= AoA <= hi, a single noun/verb/adjective tag and concreteness
/// at or above the cutoff; one survivor per lemma family (lowest AoA, then alphabetical).
inline std::vector<TargetCandidate> band_filter(const Lexicon& lex, const BandFilterOptions& opts = {},
                                                BandFilterTrace* trace = nullptr) {
  if (!lex.has_pos()) throw Error("targets.missing_pos", "lexicon has no part-of-speech column");
  if (!lex.has_concreteness())
    throw Error("targets.missing_concreteness", "lexicon has no concreteness column");
  if (opts.lo > opts.hi) throw Error("targets.bad_band", "band lower bound exceeds upper bound");

  BandFilterTrace t;
  std::vector<TargetCandidate> kept;
  std::vector<const LexiconEntry*> sources;
  for (const auto& [key, e] : lex.entries()) {
    if (e.aoa < opts.lo || e.aoa > opts.hi) continue;
    ++t.in_band;
    if (key.empty() || !std::all_of(key.begin(), key.end(), util::is_ascii_alpha)) {
      ++t.dropped_not_single_word;
      continue;
    }
    if (std::find(e.pos.begin(), e.pos.end(), "adverb") != e.pos.end()) {
      ++t.dropped_adverb;
      continue;
    }
    if (e.pos.size() != 1) {
      ++t.dropped_multi_pos;
      continue;
    }
    const auto& pos = e.pos.front();
    if (pos != "noun" && pos != "verb" && pos != "adjective") {
      ++t.dropped_other_pos;
      continue;
    }
    if (!e.concreteness || *e.concreteness < opts.min_concreteness) {
      ++t.dropped_concreteness;
      continue;
    }
    kept.push_back({key, pos, e.aoa, *e.concreteness, {}, {}, {}});
    sources.push_back(&e);
  }

  // Family grouping: candidates sharing a stem that is itself a lexicon word.
  detail::UnionFind uf(kept.size());
  std::map<std::string, std::size_t> owner;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    auto stems = morph::family_stems(kept[i].lemma);
    if (sources[i]->lemma) stems.insert(normalize_surface(*sources[i]->lemma));
    for (const auto& s : stems) {
      if (s != kept[i].lemma && !lex.contains(s)) continue;
      const auto [it, fresh] = owner.emplace(s, i);
      if (!fresh) uf.unite(i, it->second);
    }
  }
  std::map<std::size_t, std::size_t> best;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto root = uf.find(i);
    const auto [it, fresh] = best.emplace(root, i);
    if (!fresh && detail::candidate_better(kept[i], kept[it->second])) it->second = i;
  }
  std::vector<TargetCandidate> out;
  for (std::size_t i = 0; i < kept.size(); ++i)
    if (best[uf.find(i)] == i) out.push_back(kept[i]);
  t.dropped_family = kept.size() - out.size();
  if (trace) *trace = t;
  return out;
}

// ---------------------------------------------------------------------------
// Ratings

inline std::string render_candidates(const std::vector<TargetCandidate>& cands) {
  std::string out = "word\tpos\taoa\tconcreteness\n";
  for (const auto& c : cands)
    out += c.lemma + "\t" + c.pos + "\t" + util::shortest(c.aoa) + "\t" + util::shortest(c.concreteness) + "\n";
  return out;
}

/// Reads the output of render_candidates.
inline std::vector<TargetCandidate> parse_candidates(std::string_view content, const std::string& origin = "candidates") {
  std::vector<TargetCandidate> out;
  const auto lines = util::split(content, '\n');
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = util::trim(lines[i]);
    if (line.empty() || (i == 0 && line.rfind("word\t", 0) == 0)) continue;
    const auto f = util::split(line, '\t');
    const auto where = origin + ":" + std::to_string(i + 1);
    if (f.size() != 4) throw Error("targets.bad_candidates", where + ": expected word, pos, aoa, concreteness");
    const auto aoa = util::parse_double(f[2]);
    const auto conc = util::parse_double(f[3]);
    if (!aoa || !conc) throw Error("targets.bad_candidates", where + ": non-numeric aoa or concreteness");
    TargetCandidate c;
    c.lemma = normalize_surface(f[0]);
    c.pos = normalize_pos_tag(f[1]);
    c.aoa = *aoa;
    c.concreteness = *conc;
    out.push_back(std::move(c));
  }
  if (out.empty()) throw Error("targets.bad_candidates", origin + ": no candidates");
  return out;
}

struct Rating {
  std::string word;
  std::string annotator;
  int learnability = 0;
  int imageability = 0;
  int appropriateness = 0;
};

/// CSV with header `word,annotator,learnability,imageability,appropriateness`.
inline std::vector<Rating> load_ratings(const std::string& path) {
  const auto lines = util::read_lines(path);
  if (lines.empty()) throw Error("targets.bad_ratings", path + ": empty ratings file");
  std::vector<Rating> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (util::trim_view(lines[i]).empty()) continue;
    const auto f = util::parse_csv_line(lines[i]);
    const auto where = path + ":" + std::to_string(i + 1);
    if (f.size() < 5) throw Error("targets.bad_ratings", where + ": expected 5 fields");
    Rating r{normalize_surface(f[0]), util::trim(f[1]), 0, 0, 0};
    int* slots[3] = {&r.learnability, &r.imageability, &r.appropriateness};
    for (int k = 0; k < 3; ++k) {
      const auto v = util::parse_int(util::trim(f[2 + k]));
      if (!v || *v < 1 || *v > 5) throw Error("targets.bad_rating", where + ": ratings must be integers 1-5");
      *slots[k] = static_cast<int>(*v);
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline void attach_ratings(std::vector<TargetCandidate>& cands, const std::vector<Rating>& ratings) {
  std::map<std::string, TargetCandidate*> by_word;
  for (auto& c : cands) by_word[c.lemma] = &c;
  for (const auto& r : ratings) {
    const auto it = by_word.find(r.word);
    if (it == by_word.end()) continue;
    it->second->learnability.push_back(r.learnability);
    it->second->imageability.push_back(r.imageability);
    it->second->appropriateness.push_back(r.appropriateness);
  }
}

enum class Composite { min, mean, product };

inline Composite composite_from_string(std::string_view s) {
  if (s == "min") return Composite::min;
  if (s == "mean") return Composite::mean;
  if (s == "product") return Composite::product;
  throw Error("targets.bad_composite", "composite must be min, mean or product");
}

struct ScoredCandidate {
  TargetCandidate candidate;
  std::array<double, 3> means{};  // learnability, imageability, appropriateness
  double composite = 0;
};

inline std::vector<ScoredCandidate> aggregate_scores(const std::vector<TargetCandidate>& cands,
                                                     Composite how = Composite::min) {
  std::vector<ScoredCandidate> out;
  for (const auto& c : cands) {
    const std::vector<int>* lists[3] = {&c.learnability, &c.imageability, &c.appropriateness};
    ScoredCandidate s{c, {}, 0};
    for (int k = 0; k < 3; ++k) {
      if (lists[k]->empty()) throw Error("targets.missing_ratings", "no ratings for " + c.lemma);
      s.means[k] = std::accumulate(lists[k]->begin(), lists[k]->end(), 0.0) /
                   static_cast<double>(lists[k]->size());
    }
    switch (how) {
      case Composite::min: s.composite = std::min({s.means[0], s.means[1], s.means[2]}); break;
      case Composite::mean: s.composite = (s.means[0] + s.means[1] + s.means[2]) / 3.0; break;
      case Composite::product: s.composite = s.means[0] * s.means[1] * s.means[2]; break;
    }
    out.push_back(std::move(s));
  }
  return out;
}

using Quota = std::map<std::string, std::size_t>;

inline Quota default_quota() { return {{"noun", 150}, {"verb", 50}, {"adjective", 50}}; }

/// "noun=150,verb=50,adj=50"
inline Quota parse_quota(std::string_view spec) {
  Quota q;
  for (const auto& part : util::split(spec, ',')) {
    const auto item = util::trim(part);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    const auto n = eq == std::string::npos ? std::nullopt : util::parse_int(item.substr(eq + 1));
    if (!n || *n < 0) throw Error("targets.bad_quota", "bad quota item: " + item);
    q[normalize_pos_tag(item.substr(0, eq))] = static_cast<std::size_t>(*n);
  }
  if (q.empty()) throw Error("targets.bad_quota", "empty quota");
  return q;
}

/// Top-composite words per POS (ties: lower AoA, then alphabetical); result sorted alphabetically.
inline std::vector<ScoredCandidate> select_quota(const std::vector<ScoredCandidate>& scored, const Quota& quota) {
  std::map<std::string, std::vector<const ScoredCandidate*>> by_pos;
  for (const auto& s : scored) by_pos[s.candidate.pos].push_back(&s);
  std::vector<ScoredCandidate> out;
  for (const auto& [pos, k] : quota) {
    auto& pool = by_pos[pos];
    if (pool.size() < k)
      throw Error("targets.insufficient",
                  "need " + std::to_string(k) + " " + pos + "s, have " + std::to_string(pool.size()));
    std::sort(pool.begin(), pool.end(), [](const ScoredCandidate* a, const ScoredCandidate* b) {
      if (a->composite != b->composite) return a->composite > b->composite;
      if (a->candidate.aoa != b->candidate.aoa) return a->candidate.aoa < b->candidate.aoa;
      return a->candidate.lemma < b->candidate.lemma;
    });
    for (std::size_t i = 0; i < k; ++i) out.push_back(*pool[i]);
  }
  std::sort(out.begin(), out.end(),
            [](const ScoredCandidate& a, const ScoredCandidate& b) { return a.candidate.lemma < b.candidate.lemma; });
  return out;
}

// ---------------------------------------------------------------------------
// Target lists and target sets

struct TargetWord {
  std::string word;
  std::string pos;
  friend bool operator==(const TargetWord&, const TargetWord&) = default;
};

inline std::string bundled_target_list_path() { return std::string(KIDLEX_DATA_DIR) + "/target_words.tsv"; }

/// Tab- or comma-separated `word, pos` with an optional header; a bare word list is accepted too.
inline std::vector<TargetWord> load_target_list(const std::string& path = bundled_target_list_path()) {
  std::vector<TargetWord> out;
  const auto lines = util::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = util::trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    const char sep = line.find('\t') != std::string::npos ? '\t' : ',';
    auto f = util::split(line, sep);
    TargetWord t{normalize_surface(f[0]), f.size() > 1 ? normalize_pos_tag(util::trim(f[1])) : ""};
    if (i == 0 && t.word == "word") continue;
    if (t.word.empty()) throw Error("targets.bad_list", path + ":" + std::to_string(i + 1) + ": empty word");
    out.push_back(std::move(t));
  }
  if (out.empty()) throw Error("targets.bad_list", path + ": no target words");
  return out;
}

inline std::string render_target_list(const std::vector<ScoredCandidate>& sel) {
  std::string out = "word\tpos\taoa\tlearnability\timageability\tappropriateness\tcomposite\n";
  for (const auto& s : sel)
    out += s.candidate.lemma + "\t" + s.candidate.pos + "\t" + util::fixed(s.candidate.aoa, 2) + "\t" +
           util::fixed(s.means[0], 2) + "\t" + util::fixed(s.means[1], 2) + "\t" + util::fixed(s.means[2], 2) +
           "\t" + util::fixed(s.composite, 3) + "\n";
  return out;
}

/// `count` sets of 5 distinct words; words are drawn without replacement and the
/// pool is reshuffled once exhausted.
inline std::vector<std::vector<std::string>> draw_target_sets(const std::vector<std::string>& words,
                                                              std::size_t count, std::uint64_t seed) {
  std::set<std::string> distinct(words.begin(), words.end());
  if (distinct.size() < 5) throw Error("targets.insufficient", "need at least 5 distinct target words");
  std::vector<std::string> pool(distinct.begin(), distinct.end());
  std::vector<std::vector<std::string>> sets;
  std::vector<std::string> deck;
  std::size_t pos = 0, round = 0;
  while (sets.size() < count) {
    std::vector<std::string> set;
    while (set.size() < 5) {
      if (pos == deck.size()) {
        deck = pool;
        util::seeded_shuffle(deck, seed + round++);
        pos = 0;
      }
      const auto& w = deck[pos++];
      if (std::find(set.begin(), set.end(), w) == set.end()) set.push_back(w);
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

}  // namespace kidlex

#endif  // KIDLEX_TARGETWORDS_HPP
