#ifndef KIDLEX_LEXICON_HPP
#define KIDLEX_LEXICON_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kidlex/textproc.hpp"
#include "kidlex/util.hpp"

namespace kidlex {

// Rule-based inflection stripping. Candidates are ordered by preference and never
// include the input itself.
namespace morph {

namespace detail {

inline bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}
inline bool is_consonant(char c) { return util::is_ascii_alpha(c) && !is_vowel(c); }
inline bool has_vowel(std::string_view s) {
  for (char c : s)
    if (is_vowel(c) || c == 'y') return true;
  return false;
}

// Short stem ending consonant-vowel-consonant (hop, mak, nic), where a dropped
// final 'e' is likely.
inline bool ends_cvc(std::string_view x) {
  const std::size_t n = x.size();
  if (n < 3) return false;
  const char last = x[n - 1];
  return is_consonant(last) && last != 'w' && last != 'x' && last != 'y' && is_vowel(x[n - 2]) &&
         is_consonant(x[n - 3]);
}

inline void push_unique(std::vector<std::string>& out, std::string s, std::string_view self) {
  if (s.empty() || s == self) return;
  for (const auto& e : out)
    if (e == s) return;
  out.push_back(std::move(s));
}

// Stem after removing -ed/-ing/-er/-est: e-restoration, bare stem,
// consonant undoubling.
inline void stem_variants(std::vector<std::string>& out, const std::string& x,
                          std::string_view self) {
  if (x.size() < 2 || !has_vowel(x)) return;
  if (ends_cvc(x)) push_unique(out, x + "e", self);
  push_unique(out, x, self);
  const std::size_t n = x.size();
  if (n >= 3 && x[n - 1] == x[n - 2] && is_consonant(x[n - 1])) push_unique(out, x.substr(0, n - 1), self);
  push_unique(out, x + "e", self);
}

}  // namespace detail

inline std::vector<std::string> lemma_candidates(std::string_view word) {
  using namespace detail;
  std::vector<std::string> out;
  const std::string w(word);
  const std::size_t n = w.size();
  const auto strip = [&](std::size_t k) { return w.substr(0, n - k); };

  if (util::ends_with(w, "'s") && n > 2) push_unique(out, strip(2), w);
  if (util::ends_with(w, "s'") && n > 2) push_unique(out, strip(1), w);
  if (util::ends_with(w, "ies") && n > 4) push_unique(out, strip(3) + "y", w);
  if (util::ends_with(w, "s") && !util::ends_with(w, "ss") && !util::ends_with(w, "'s") && n > 3)
    push_unique(out, strip(1), w);
  if (util::ends_with(w, "es") && n > 3) push_unique(out, strip(2), w);
  if (util::ends_with(w, "ied") && n > 4) push_unique(out, strip(3) + "y", w);
  if (util::ends_with(w, "ed") && n > 3) stem_variants(out, strip(2), w);
  if (util::ends_with(w, "ing") && n > 4) stem_variants(out, strip(3), w);
  if (util::ends_with(w, "iest") && n > 5) push_unique(out, strip(4) + "y", w);
  if (util::ends_with(w, "est") && n > 4) stem_variants(out, strip(3), w);
  if (util::ends_with(w, "ier") && n > 4) push_unique(out, strip(3) + "y", w);
  if (util::ends_with(w, "er") && n > 3) stem_variants(out, strip(2), w);
  return out;
}

// Inflectional candidates plus a few derivational ones (-ly, -ily, -ness), used to
// decide whether two words belong to the same lemma family.
inline std::set<std::string> family_stems(std::string_view word) {
  const std::string w = util::to_lower(word);
  std::set<std::string> stems{w};
  for (auto& c : lemma_candidates(w)) stems.insert(std::move(c));
  const std::size_t n = w.size();
  if (util::ends_with(w, "ily") && n > 4) stems.insert(w.substr(0, n - 3) + "y");
  if (util::ends_with(w, "ly") && n > 4) stems.insert(w.substr(0, n - 2));
  if (util::ends_with(w, "ness") && n > 6) stems.insert(w.substr(0, n - 4));
  return stems;
}

inline bool same_family(std::string_view a, std::string_view b) {
  const auto sa = family_stems(a);
  for (const auto& s : family_stems(b))
    if (sa.contains(s)) return true;
  return false;
}

}  // namespace morph

struct LexiconEntry {
  std::string surface;
  double aoa = 0.0;
  std::optional<double> concreteness;
  std::vector<std::string> pos;  // normalized tags: noun, verb, adjective, adverb, ...
  std::optional<std::string> lemma;
  friend bool operator==(const LexiconEntry&, const LexiconEntry&) = default;
};

// Column names are matched case-insensitively against the header; a purely
// numeric reference that matches no header name is taken as a 0-based index.
struct ColumnMap {
  std::string word = "word";
  std::string aoa = "aoa";
  std::optional<std::string> concreteness;
  std::optional<std::string> pos;
  std::optional<std::string> lemma;
};

struct LexiconSource {
  std::string path;
  ColumnMap columns;
  std::size_t data_rows = 0;
  std::size_t malformed_rows = 0;
  std::vector<std::size_t> malformed_lines;  // 1-based, capped at 20
  std::size_t collisions = 0;
  std::string collision_policy = "keep-lowest-aoa";
};

enum class MatchRung { exact, lemma };

inline std::string_view to_string(MatchRung rung) {
  return rung == MatchRung::exact ? "exact" : "lemma";
}

struct LookupResult {
  double aoa;
  MatchRung via;
  std::string matched;  // the lexicon key that was hit
};

inline std::string normalize_pos_tag(std::string_view raw) {
  const std::string t = util::to_lower(util::trim(raw));
  if (t == "n" || t == "nn" || t == "nns" || t == "noun" || t == "nouns") return "noun";
  if (t == "v" || t == "vb" || t == "verb" || t == "verbs") return "verb";
  if (t == "a" || t == "adj" || t == "jj" || t == "adjective") return "adjective";
  if (t == "r" || t == "adv" || t == "rb" || t == "adverb") return "adverb";
  return t;
}

inline std::vector<std::string> parse_pos_tags(std::string_view field) {
  std::vector<std::string> tags;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      auto tag = normalize_pos_tag(cur);
      if (!tag.empty() && tag != "na" && std::find(tags.begin(), tags.end(), tag) == tags.end())
        tags.push_back(std::move(tag));
    }
    cur.clear();
  };
  for (char c : field) {
    if (c == '|' || c == ';' || c == '/' || c == '.' || c == '+' || c == ' ' || c == '\t')
      flush();
    else
      cur += c;
  }
  flush();
  return tags;
}

inline std::string normalize_surface(std::string_view raw) {
  std::string out = util::to_lower(util::trim(raw));
  // Fold U+2019 to ASCII apostrophe.
  for (std::size_t pos; (pos = out.find("\xE2\x80\x99")) != std::string::npos;)
    out.replace(pos, 3, "'");
  return out;
}

class Lexicon {
 public:
  Lexicon() = default;

  /// Builds a lexicon from in-memory entries; duplicate surfaces keep the lowest AoA.
  static Lexicon from_entries(std::vector<LexiconEntry> entries, LexiconSource source = {}) {
    Lexicon lex;
    lex.source_ = std::move(source);
    for (auto& e : entries) {
      e.surface = normalize_surface(e.surface);
      if (e.surface.empty() || !(e.aoa > 0))
        throw Error("lexicon.bad_entry", "entry needs a non-empty surface and aoa > 0");
      lex.insert(std::move(e));
    }
    return lex;
  }

  static Lexicon load(const std::string& path, const ColumnMap& columns) {
    const auto lines = util::read_lines(path);
    if (lines.empty()) throw Error("lexicon.no_header", "lexicon file is empty: " + path);
    const auto header = util::parse_csv_line(lines.front());

    const auto resolve = [&](const std::string& ref, const char* role) -> std::size_t {
      for (std::size_t i = 0; i < header.size(); ++i)
        if (util::iequals(util::trim(header[i]), util::trim(ref))) return i;
      if (auto idx = util::parse_int(ref); idx && *idx >= 0 && static_cast<std::size_t>(*idx) < header.size())
        return static_cast<std::size_t>(*idx);
      throw Error("lexicon.missing_column",
                  std::string(role) + " column '" + ref + "' not found in header of " + path);
    };
    const std::size_t word_col = resolve(columns.word, "word");
    const std::size_t aoa_col = resolve(columns.aoa, "aoa");
    const auto opt_col = [&](const std::optional<std::string>& ref, const char* role) {
      return ref ? std::optional<std::size_t>(resolve(*ref, role)) : std::nullopt;
    };
    const auto conc_col = opt_col(columns.concreteness, "concreteness");
    const auto pos_col = opt_col(columns.pos, "pos");
    const auto lemma_col = opt_col(columns.lemma, "lemma");

    Lexicon lex;
    lex.source_.path = path;
    lex.source_.columns = columns;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (util::trim_view(lines[i]).empty()) continue;
      ++lex.source_.data_rows;
      const auto fields = util::parse_csv_line(lines[i]);
      const auto field = [&](std::size_t c) -> std::optional<std::string> {
        return c < fields.size() ? std::optional<std::string>(util::trim(fields[c])) : std::nullopt;
      };
      const auto word = field(word_col);
      const auto aoa_text = field(aoa_col);
      const auto aoa = aoa_text ? util::parse_double(*aoa_text) : std::nullopt;
      if (!word || word->empty() || !aoa || !(*aoa > 0)) {
        ++lex.source_.malformed_rows;
        if (lex.source_.malformed_lines.size() < 20) lex.source_.malformed_lines.push_back(i + 1);
        continue;
      }
      LexiconEntry e;
      e.surface = normalize_surface(*word);
      e.aoa = *aoa;
      if (conc_col) {
        if (auto text = field(*conc_col)) {
          auto v = util::parse_double(*text);
          if (v && *v >= 1.0 && *v <= 5.0) e.concreteness = v;
        }
      }
      if (pos_col) {
        if (auto text = field(*pos_col)) e.pos = parse_pos_tags(*text);
      }
      if (lemma_col) {
        if (auto text = field(*lemma_col); text && !text->empty()) e.lemma = normalize_surface(*text);
      }
      lex.insert(std::move(e));
    }
    if (lex.entries_.empty())
      throw Error("lexicon.zero_rows", "zero parseable rows in " + path);
    return lex;
  }

  const LexiconEntry* find(std::string_view surface) const {
    auto it = entries_.find(std::string(surface));
    return it == entries_.end() ? nullptr : &it->second;
  }

  bool contains(std::string_view surface) const { return find(surface) != nullptr; }

  /// Exact lower-case match first; the suffix-strip lemma rung is consulted only
  /// when the exact rung misses.
  std::optional<LookupResult> lookup(std::string_view token_form) const {
    const std::string form = normalize_surface(token_form);
    if (form.empty()) return std::nullopt;
    if (const auto* e = find(form)) return LookupResult{e->aoa, MatchRung::exact, e->surface};
    if (form.find('\'') != std::string::npos) {
      std::string bare;
      for (char c : form)
        if (c != '\'') bare += c;
      if (const auto* e = find(bare)) return LookupResult{e->aoa, MatchRung::exact, e->surface};
    }
    for (const auto& cand : morph::lemma_candidates(form))
      if (const auto* e = find(cand)) return LookupResult{e->aoa, MatchRung::lemma, e->surface};
    return std::nullopt;
  }

  std::optional<double> aoa(std::string_view token_form) const {
    auto r = lookup(token_form);
    return r ? std::optional<double>(r->aoa) : std::nullopt;
  }

  const std::map<std::string, LexiconEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const LexiconSource& source() const { return source_; }
  bool has_pos() const { return source_.columns.pos.has_value() || any_pos_; }
  bool has_concreteness() const { return source_.columns.concreteness.has_value() || any_concreteness_; }

  friend bool operator==(const Lexicon& a, const Lexicon& b) { return a.entries_ == b.entries_; }

 private:
  void insert(LexiconEntry e) {
    any_pos_ = any_pos_ || !e.pos.empty();
    any_concreteness_ = any_concreteness_ || e.concreteness.has_value();
    auto [it, inserted] = entries_.try_emplace(e.surface, e);
    if (!inserted) {
      ++source_.collisions;
      if (e.aoa < it->second.aoa) it->second = std::move(e);
    }
  }

  std::map<std::string, LexiconEntry> entries_;
  LexiconSource source_;
  bool any_pos_ = false;
  bool any_concreteness_ = false;
};

inline Lexicon load_lexicon(const std::string& path, const ColumnMap& columns) {
  return Lexicon::load(path, columns);
}

/// Fraction of word tokens (numbers and punctuation excluded) found on any rung.
inline double coverage(const Lexicon& lex, const Document& doc) {
  std::size_t words = 0, found = 0;
  for (const auto& t : doc.tokens) {
    if (!t.is_word()) continue;
    ++words;
    if (lex.lookup(t.lower)) ++found;
  }
  if (words == 0) throw Error("lexicon.no_word_tokens", "no word tokens");
  return static_cast<double>(found) / static_cast<double>(words);
}

}  // namespace kidlex

#endif  // KIDLEX_LEXICON_HPP
