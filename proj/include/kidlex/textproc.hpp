#ifndef KIDLEX_TEXTPROC_HPP
#define KIDLEX_TEXTPROC_HPP

// Deterministic tokenization, sentence segmentation and syllable counting.
//
// Offsets are byte offsets into the UTF-8 source. Word tokens are maximal runs of
// letters and apostrophes (leading/trailing apostrophes are split off as
// punctuation); hyphenated compounds become separate word tokens flagged
// `hyphen_joined`. Numbers are digit runs, optionally with '.' or ',' between
// digits, and count one syllable per digit.
//
// A sentence ends at '.', '!', '?' or an ellipsis (plus any trailing closing
// quotes/brackets) that is followed by end of text, or by whitespace and an
// upper-case letter (after optional opening quotes). A '.' directly after a
// stoplisted abbreviation ("Dr", "Mrs", ...) never ends a sentence. A blank line
// always ends a sentence.

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kidlex/util.hpp"

#ifndef KIDLEX_DATA_DIR
#define KIDLEX_DATA_DIR "data"
#endif

namespace kidlex {

enum class TokenKind { word, number, punctuation };

inline std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::word: return "word";
    case TokenKind::number: return "number";
    case TokenKind::punctuation: return "punctuation";
  }
  return "?";
}

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct Token {
  std::string surface;
  std::string lower;  // lower-cased surface, typographic apostrophes folded to '\''
  std::string norm;   // lower-cased letters only
  Span span;
  TokenKind kind = TokenKind::punctuation;
  std::size_t sentence_idx = 0;
  int syllables = 0;
  bool syllables_from_dictionary = false;
  bool sentence_initial = false;
  bool is_propername = false;
  bool hyphen_joined = false;
  int characters = 0;  // alphanumeric code points

  bool is_word() const { return kind == TokenKind::word; }
  bool counts_as_word() const { return kind != TokenKind::punctuation; }
  friend bool operator==(const Token&, const Token&) = default;
};

struct Document {
  std::string text;
  std::vector<Token> tokens;
  std::vector<Span> sentences;  // byte extent of each sentence
  std::size_t sentence_count = 0;

  std::size_t word_count() const {
    std::size_t n = 0;
    for (const auto& t : tokens) n += t.counts_as_word() ? 1 : 0;
    return n;
  }
  std::string_view sentence_text(std::size_t idx) const {
    const Span s = sentences.at(idx);
    return std::string_view(text).substr(s.begin, s.size());
  }
  friend bool operator==(const Document&, const Document&) = default;
};

/// Vowel-group heuristic: count groups of a/e/i/o/u/y, drop a silent final 'e'
/// (one that follows a consonant) unless the word ends in consonant + "le";
/// never below 1.
inline int heuristic_syllables(std::string_view word) {
  const auto vowel = [](char c) {
    c = util::ascii_lower(c);
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
  };
  int groups = 0;
  bool in_group = false;
  for (char c : word) {
    const bool v = vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  const std::size_t n = word.size();
  if (n >= 2 && util::ascii_lower(word[n - 1]) == 'e' && !vowel(word[n - 2])) {
    const bool consonant_le = n >= 3 && util::ascii_lower(word[n - 2]) == 'l' &&
                              !vowel(word[n - 3]) && util::is_ascii_alpha(word[n - 3]);
    if (!consonant_le) --groups;
  }
  return groups < 1 ? 1 : groups;
}

class SyllableCounter {
 public:
  struct Count {
    int syllables;
    bool from_dictionary;
  };

  SyllableCounter() = default;
  explicit SyllableCounter(std::unordered_map<std::string, int> table, std::string source = {})
      : table_(std::move(table)), source_(std::move(source)) {}

  // Two-column `word<TAB>count` file.
  static SyllableCounter load(const std::string& path) {
    std::unordered_map<std::string, int> table;
    std::size_t line_no = 0;
    for (const auto& line : util::read_lines(path)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      const auto cols = util::split(line, '\t');
      const auto count = cols.size() == 2 ? util::parse_int(cols[1]) : std::nullopt;
      if (!count || *count < 1)
        throw Error("textproc.bad_syllable_dict",
                    path + ":" + std::to_string(line_no) + ": expected word<TAB>count");
      table.emplace(util::to_lower(util::trim(cols[0])), static_cast<int>(*count));
    }
    return SyllableCounter(std::move(table), path);
  }

  Count count(std::string_view word) const {
    if (word.empty()) throw Error("textproc.empty_word", "cannot count syllables of an empty word");
    std::string key;
    key.reserve(word.size());
    for (char c : word)
      if (util::is_ascii_alpha(c)) key += util::ascii_lower(c);
    if (!key.empty()) {
      if (auto it = table_.find(key); it != table_.end()) return {it->second, true};
    }
    return {heuristic_syllables(key.empty() ? word : std::string_view(key)), false};
  }

  int operator()(std::string_view word) const { return count(word).syllables; }

  std::size_t dictionary_size() const { return table_.size(); }
  const std::string& source() const { return source_; }

 private:
  std::unordered_map<std::string, int> table_;
  std::string source_;
};

// Bundled pronunciation-derived table when present, heuristic-only otherwise.
inline const SyllableCounter& default_syllable_counter() {
  static const SyllableCounter counter = [] {
    try {
      return SyllableCounter::load(std::string(KIDLEX_DATA_DIR) + "/syllables.tsv");
    } catch (const Error&) {
      return SyllableCounter();
    }
  }();
  return counter;
}

namespace detail {

inline std::uint32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t& len) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t i) -> std::uint32_t {
    if (pos + i >= s.size()) return 0xFFFFFFFF;
    const auto b = static_cast<unsigned char>(s[pos + i]);
    return (b & 0xC0) == 0x80 ? (b & 0x3Fu) : 0xFFFFFFFF;
  };
  if (b0 < 0x80) {
    len = 1;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0) {
    const auto c1 = cont(1);
    if (c1 != 0xFFFFFFFF) {
      len = 2;
      return ((b0 & 0x1Fu) << 6) | c1;
    }
  } else if ((b0 & 0xF0) == 0xE0) {
    const auto c1 = cont(1), c2 = cont(2);
    if (c1 != 0xFFFFFFFF && c2 != 0xFFFFFFFF) {
      len = 3;
      return ((b0 & 0x0Fu) << 12) | (c1 << 6) | c2;
    }
  } else if ((b0 & 0xF8) == 0xF0) {
    const auto c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 != 0xFFFFFFFF && c2 != 0xFFFFFFFF && c3 != 0xFFFFFFFF) {
      len = 4;
      return ((b0 & 0x07u) << 18) | (c1 << 12) | (c2 << 6) | c3;
    }
  }
  len = 1;  // invalid byte: treat as an opaque symbol
  return 0xFFFD;
}

inline bool is_letter(std::uint32_t cp) {
  if (cp < 0x80) return util::is_ascii_alpha(static_cast<char>(cp));
  // Latin-1 supplement and Latin Extended-A/B letters.
  return cp >= 0xC0 && cp <= 0x24F && cp != 0xD7 && cp != 0xF7;
}
inline bool is_upper(std::uint32_t cp) {
  if (cp < 0x80) return util::is_ascii_upper(static_cast<char>(cp));
  return cp >= 0xC0 && cp <= 0xDE && cp != 0xD7;
}
inline bool is_digit(std::uint32_t cp) { return cp >= '0' && cp <= '9'; }
inline bool is_space(std::uint32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' ||
         cp == 0xA0 || cp == 0x2009 || cp == 0x202F;
}
inline bool is_apostrophe(std::uint32_t cp) { return cp == '\'' || cp == 0x2019 || cp == 0x02BC; }
inline bool is_hyphen(std::uint32_t cp) { return cp == '-' || cp == 0x2010 || cp == 0x2011; }
inline bool is_terminator(std::uint32_t cp) {
  return cp == '.' || cp == '!' || cp == '?' || cp == 0x2026;
}
inline bool is_closer(std::uint32_t cp) {
  return cp == '"' || cp == '\'' || cp == ')' || cp == ']' || cp == 0x201D || cp == 0x2019;
}
inline bool is_opener(std::uint32_t cp) {
  return cp == '"' || cp == '\'' || cp == '(' || cp == '[' || cp == 0x201C || cp == 0x2018;
}

inline const std::unordered_set<std::string>& abbreviations() {
  static const std::unordered_set<std::string> stoplist = {
      "mr", "mrs", "ms", "dr", "st", "jr", "sr", "prof", "mt", "vs", "etc", "capt", "col",
      "gen", "gov", "lt", "sgt", "rev", "hon", "fr", "no", "ave", "rd", "e.g", "i.e", "eg", "ie"};
  return stoplist;
}

struct RawToken {
  Span span;
  TokenKind kind;
  std::uint32_t first_cp;  // for punctuation
};

}  // namespace detail

class Tokenizer {
 public:
  explicit Tokenizer(const SyllableCounter& counter = default_syllable_counter())
      : counter_(&counter) {}

  Document operator()(std::string text) const {
    Document doc;
    doc.text = std::move(text);
    const std::string_view s = doc.text;
    auto raw = scan(s);

    // Tokens in order, then sentence boundaries as byte positions.
    std::vector<std::size_t> boundaries = find_boundaries(s, raw);

    std::size_t sentence = 0;
    std::size_t next_boundary = 0;
    bool started = false;
    bool sentence_has_word = false;
    std::size_t sentence_begin = 0;
    std::size_t last_end = 0;

    // A segment without any word or number is folded into the following sentence.
    auto close_sentence = [&]() {
      if (!sentence_has_word) return;
      doc.sentences.push_back({sentence_begin, last_end});
      ++sentence;
      sentence_has_word = false;
      started = false;
    };

    for (const auto& r : raw) {
      while (next_boundary < boundaries.size() && boundaries[next_boundary] <= r.span.begin) {
        close_sentence();
        ++next_boundary;
      }
      Token t;
      t.span = r.span;
      t.kind = r.kind;
      t.surface = std::string(s.substr(r.span.begin, r.span.size()));
      fill_forms(t);
      if (!started) {
        sentence_begin = t.span.begin;
        started = true;
      }
      if (t.counts_as_word() && !sentence_has_word) {
        t.sentence_initial = true;
        sentence_has_word = true;
      }
      t.sentence_idx = sentence;
      last_end = t.span.end;
      doc.tokens.push_back(std::move(t));
    }
    close_sentence();
    doc.sentence_count = doc.sentences.size();
    // A trailing punctuation-only tail belongs to the last sentence.
    if (doc.sentence_count > 0)
      for (auto& t : doc.tokens)
        if (t.sentence_idx >= doc.sentence_count) t.sentence_idx = doc.sentence_count - 1;

    mark_hyphens_and_names(doc);
    return doc;
  }

  const SyllableCounter& counter() const { return *counter_; }

 private:
  const SyllableCounter* counter_;

  static std::vector<detail::RawToken> scan(std::string_view s) {
    using namespace detail;
    std::vector<RawToken> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
      std::size_t len;
      const auto cp = decode_utf8(s, pos, len);
      if (is_space(cp)) {
        pos += len;
        continue;
      }
      if (is_letter(cp) || is_apostrophe(cp)) {
        // Maximal letter/apostrophe run, then peel apostrophes off both ends.
        std::size_t end = pos;
        std::vector<std::pair<std::size_t, std::size_t>> cps;  // (offset, len)
        while (end < s.size()) {
          std::size_t l;
          const auto c = decode_utf8(s, end, l);
          if (!(is_letter(c) || is_apostrophe(c))) break;
          cps.emplace_back(end, l);
          end += l;
        }
        std::size_t first = 0, last = cps.size();
        auto apos_at = [&](std::size_t k) {
          std::size_t l;
          return is_apostrophe(decode_utf8(s, cps[k].first, l));
        };
        while (first < last && apos_at(first)) ++first;
        while (last > first && apos_at(last - 1)) --last;
        for (std::size_t k = 0; k < first; ++k)
          out.push_back({{cps[k].first, cps[k].first + cps[k].second}, TokenKind::punctuation,
                         decode_utf8(s, cps[k].first, len)});
        if (first < last)
          out.push_back({{cps[first].first, cps[last - 1].first + cps[last - 1].second},
                         TokenKind::word, 0});
        for (std::size_t k = std::max(last, first); k < cps.size(); ++k)
          out.push_back({{cps[k].first, cps[k].first + cps[k].second}, TokenKind::punctuation,
                         decode_utf8(s, cps[k].first, len)});
        pos = end;
        continue;
      }
      if (is_digit(cp)) {
        std::size_t end = pos + 1;
        while (end < s.size()) {
          if (util::is_ascii_digit(s[end])) {
            ++end;
          } else if ((s[end] == '.' || s[end] == ',') && end + 1 < s.size() &&
                     util::is_ascii_digit(s[end + 1])) {
            end += 2;
          } else {
            break;
          }
        }
        out.push_back({{pos, end}, TokenKind::number, 0});
        pos = end;
        continue;
      }
      out.push_back({{pos, pos + len}, TokenKind::punctuation, cp});
      pos += len;
    }
    return out;
  }

  static bool is_abbreviation(std::string_view s, const std::vector<detail::RawToken>& raw,
                              std::size_t dot_idx) {
    if (dot_idx == 0) return false;
    const auto& prev = raw[dot_idx - 1];
    if (prev.kind != TokenKind::word || prev.span.end != raw[dot_idx].span.begin) return false;
    std::string word = util::to_lower(s.substr(prev.span.begin, prev.span.size()));
    // "e.g." / "i.e.": letter '.' letter '.'
    if (dot_idx >= 3 && raw[dot_idx - 2].kind == TokenKind::punctuation &&
        raw[dot_idx - 2].first_cp == '.' && raw[dot_idx - 3].kind == TokenKind::word &&
        raw[dot_idx - 3].span.end == raw[dot_idx - 2].span.begin &&
        raw[dot_idx - 2].span.end == prev.span.begin) {
      word = util::to_lower(s.substr(raw[dot_idx - 3].span.begin, raw[dot_idx - 3].span.size())) +
             "." + word;
    }
    return detail::abbreviations().contains(word);
  }

  static std::vector<std::size_t> find_boundaries(std::string_view s,
                                                  const std::vector<detail::RawToken>& raw) {
    using namespace detail;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      // Blank line between tokens.
      if (i > 0) {
        const std::string_view gap = s.substr(raw[i - 1].span.end,
                                              raw[i].span.begin - raw[i - 1].span.end);
        const auto first_nl = gap.find('\n');
        if (first_nl != std::string_view::npos && gap.find('\n', first_nl + 1) != std::string_view::npos)
          out.push_back(raw[i].span.begin);
      }
      const auto& r = raw[i];
      if (r.kind != TokenKind::punctuation || !is_terminator(r.first_cp)) continue;
      if (r.first_cp == '.' && is_abbreviation(s, raw, i)) continue;
      // Swallow adjacent terminators and closers.
      std::size_t j = i;
      while (j + 1 < raw.size() && raw[j + 1].kind == TokenKind::punctuation &&
             raw[j + 1].span.begin == raw[j].span.end &&
             (is_terminator(raw[j + 1].first_cp) || is_closer(raw[j + 1].first_cp)))
        ++j;
      const std::size_t after = raw[j].span.end;
      std::size_t pos = after;
      bool saw_space = false;
      std::size_t len;
      while (pos < s.size() && is_space(decode_utf8(s, pos, len))) {
        saw_space = true;
        pos += len;
      }
      bool boundary = false;
      if (pos >= s.size()) {
        boundary = true;
      } else if (saw_space) {
        while (pos < s.size()) {
          const auto cp = decode_utf8(s, pos, len);
          if (!is_opener(cp)) break;
          pos += len;
        }
        boundary = pos < s.size() && is_upper(decode_utf8(s, pos, len));
      }
      if (boundary) {
        // Boundary sits at the start of the next token.
        if (j + 1 < raw.size()) out.push_back(raw[j + 1].span.begin);
        i = j;
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void fill_forms(Token& t) const {
    const std::string_view s = t.surface;
    std::size_t pos = 0;
    while (pos < s.size()) {
      std::size_t len;
      const auto cp = detail::decode_utf8(s, pos, len);
      if (detail::is_apostrophe(cp)) {
        t.lower += '\'';
      } else {
        const std::string piece(s.substr(pos, len));
        const std::string lowered = len == 1 ? std::string(1, util::ascii_lower(piece[0])) : piece;
        t.lower += lowered;
        if (detail::is_letter(cp)) t.norm += lowered;
        if (detail::is_letter(cp) || detail::is_digit(cp)) ++t.characters;
      }
      pos += len;
    }
    if (t.kind == TokenKind::word) {
      const auto c = counter_->count(t.norm);
      t.syllables = c.syllables;
      t.syllables_from_dictionary = c.from_dictionary;
    } else if (t.kind == TokenKind::number) {
      t.norm.clear();
      t.syllables = 0;
      for (char c : t.surface) t.syllables += util::is_ascii_digit(c) ? 1 : 0;
    }
  }

  static void mark_hyphens_and_names(Document& doc) {
    const std::string_view s = doc.text;
    auto& toks = doc.tokens;
    for (std::size_t i = 1; i + 1 < toks.size(); ++i) {
      std::size_t len;
      if (toks[i].kind != TokenKind::punctuation ||
          !detail::is_hyphen(detail::decode_utf8(s, toks[i].span.begin, len)))
        continue;
      if (toks[i - 1].is_word() && toks[i + 1].is_word() &&
          toks[i - 1].span.end == toks[i].span.begin && toks[i].span.end == toks[i + 1].span.begin) {
        toks[i - 1].hyphen_joined = true;
        toks[i + 1].hyphen_joined = true;
      }
    }
    for (std::size_t i = 0; i < toks.size(); ++i) {
      auto& t = toks[i];
      if (!t.is_word() || t.sentence_initial) continue;
      std::size_t len;
      if (!detail::is_upper(detail::decode_utf8(s, t.span.begin, len))) continue;
      if (t.lower == "i" || t.lower.starts_with("i'")) continue;
      // Capitalized first word of quoted speech is not a name.
      if (i > 0 && toks[i - 1].kind == TokenKind::punctuation &&
          toks[i - 1].span.end == t.span.begin) {
        const auto q = detail::decode_utf8(s, toks[i - 1].span.begin, len);
        const bool opens = q == 0x201C || q == 0x2018 ||
                           ((q == '"' || q == '\'') &&
                            (toks[i - 1].span.begin == 0 ||
                             detail::is_space(static_cast<unsigned char>(s[toks[i - 1].span.begin - 1]))));
        if (opens) continue;
      }
      t.is_propername = true;
    }
  }
};

inline Document tokenize(std::string text, const SyllableCounter& counter = default_syllable_counter()) {
  return Tokenizer(counter)(std::move(text));
}

inline int count_syllables(std::string_view word,
                           const SyllableCounter& counter = default_syllable_counter()) {
  return counter(word);
}

/// Gunning-Fog hard word: at least three syllables, and not (i) a proper noun,
/// (ii) a hyphenated compound (its parts are tokens of their own and are judged
/// separately), or (iii) a two-syllable stem pushed to three by -es/-ed.
inline bool is_hard_word(const Token& token,
                         const SyllableCounter& counter = default_syllable_counter()) {
  if (!token.is_word() || token.syllables < 3) return false;
  if (token.is_propername) return false;
  const std::string& w = token.norm;
  if (token.syllables == 3 && w.size() > 3 && (util::ends_with(w, "es") || util::ends_with(w, "ed"))) {
    const std::string minus_one = w.substr(0, w.size() - 1);
    const std::string minus_two = w.substr(0, w.size() - 2);
    if (util::ends_with(minus_one, "e") && counter(minus_one) == 2) return false;
    if (!minus_two.empty() && counter(minus_two) == 2) return false;
  }
  return true;
}

}  // namespace kidlex

#endif  // KIDLEX_TEXTPROC_HPP
