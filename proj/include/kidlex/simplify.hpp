#ifndef KIDLEX_SIMPLIFY_HPP
#define KIDLEX_SIMPLIFY_HPP

// Lexical simplification: complex-word identification, candidate generation
// (thesaurus table or LLM prompt), post-filtering and ranking, story rewriting.
//
// Post-filter rules, each a pure predicate on (candidate, original):
//   non_word    no lexicon entry and not a letters-only form
//   antonym     listed as an antonym of the original (either direction)
//   same_family same lemma family as the original ("enormously" for "enormous")
//   not_simpler AoA known and >= the original's AoA
// Candidates with unknown AoA survive but rank below every AoA-known one.

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kidlex/audit.hpp"
#include "kidlex/genclient.hpp"
#include "kidlex/lexicon.hpp"
#include "kidlex/textproc.hpp"

namespace kidlex {

struct ComplexSpan {
  std::size_t sentence_idx = 0;
  std::string sentence;
  std::string word;      // surface form
  Span span;             // byte offsets within `sentence`
  Span doc_span;         // byte offsets within the document
  double aoa = 0;
  friend bool operator==(const ComplexSpan&, const ComplexSpan&) = default;
};

struct ComplexOptions {
  double threshold = 6.0;
  ThresholdOp op = ThresholdOp::greater;
  bool lemma_exemption = true;  // exempt inflected forms of exempt words too
};

/// Found word tokens above the threshold and outside `exempt`, first occurrence per
/// (sentence, word). Matches the audit's inappropriateness flags on the same inputs.
inline std::vector<ComplexSpan> identify_complex(const Document& doc, const Lexicon& lex,
                                                 const std::vector<std::string>& exempt = {},
                                                 const ComplexOptions& opts = {}) {
  const auto targets = normalized_targets(exempt);
  std::vector<ComplexSpan> out;
  std::set<std::pair<std::size_t, std::string>> seen;
  for (const auto& t : doc.tokens) {
    if (!t.is_word()) continue;
    const auto hit = lex.lookup(t.lower);
    if (!hit || !exceeds(hit->aoa, opts.threshold, opts.op)) continue;
    if (matches_any_target(t.lower, targets, opts.lemma_exemption)) continue;
    if (!seen.emplace(t.sentence_idx, t.lower).second) continue;
    const auto& s = doc.sentences[t.sentence_idx];
    out.push_back({t.sentence_idx, std::string(doc.sentence_text(t.sentence_idx)), t.surface,
                   Span{t.span.begin - s.begin, t.span.end - s.begin}, t.span, hit->aoa});
  }
  return out;
}

/// Span for `word` located inside a free-standing sentence (first whole-word match).
inline std::optional<ComplexSpan> locate_word(const std::string& sentence, const std::string& word, double aoa = 0) {
  const auto doc = tokenize(sentence);
  const auto target = normalize_surface(word);
  for (const auto& t : doc.tokens)
    if (t.is_word() && t.lower == target)
      return ComplexSpan{0, sentence, t.surface, t.span, t.span, aoa};
  // Multi-token complex words fall back to a case-insensitive substring search.
  const auto hay = util::to_lower(sentence);
  const auto at = hay.find(util::to_lower(word));
  if (at == std::string::npos || word.empty()) return std::nullopt;
  return ComplexSpan{0, sentence, sentence.substr(at, word.size()), {at, at + word.size()}, {at, at + word.size()}, aoa};
}

// ---------------------------------------------------------------------------
// Candidates

struct Candidate {
  std::string word;
  double score = 0;      // higher is better
  std::string source;
  std::optional<double> aoa;
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct TraceEntry {
  std::string word;
  std::string rule;
  std::string detail;
};

struct CandidateList {
  ComplexSpan original;
  std::vector<Candidate> candidates;
  std::vector<TraceEntry> trace;
};

using WordTable = std::map<std::string, std::vector<std::string>>;

/// `word<TAB>comma-joined-list`, one entry per line; repeated keys merge.
inline WordTable load_word_table(const std::string& path) {
  WordTable t;
  const auto lines = util::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = util::trim_view(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw Error("simplify.bad_table", path + ":" + std::to_string(i + 1) + ": expected word<TAB>list");
    auto& dst = t[normalize_surface(line.substr(0, tab))];
    for (const auto& item : util::split(line.substr(tab + 1), ',')) {
      const auto w = normalize_surface(item);
      if (!w.empty() && std::find(dst.begin(), dst.end(), w) == dst.end()) dst.push_back(w);
    }
  }
  return t;
}

inline std::string render_synonym_prompt(std::string_view word, std::string_view sentence, std::size_t k) {
  static const char* heads[] = {"Name a simpler synonym", "Name two simpler synonyms", "Name three simpler synonyms"};
  if (k < 1 || k > 3) throw Error("simplify.bad_k", "synonym prompts exist for k = 1, 2 or 3");
  return std::string(heads[k - 1]) + " that could replace the word " + std::string(word) +
         " in the following sentence: " + std::string(sentence);
}

/// Splits a free-text answer ("1. big\n2. huge", "big, huge or large") into
/// single-token words in answer order.
inline std::vector<std::string> parse_candidate_response(std::string_view text) {
  std::string flat;
  for (char c : text) flat += (c == '\n' || c == ';' || c == '/') ? ',' : c;
  for (const std::string joiner : {" and ", " or "}) {
    for (auto at = util::to_lower(flat).find(joiner); at != std::string::npos;
         at = util::to_lower(flat).find(joiner))
      flat.replace(at, joiner.size(), ",");
  }
  const auto strip_lead = [](char c) {
    return util::is_ascii_digit(c) || c == '.' || c == ')' || c == '-' || c == '*' || c == ' ' || c == '"' ||
           c == '\'';
  };
  const auto strip_tail = [](char c) { return c == '.' || c == '"' || c == '\'' || c == '!' || c == ' '; };
  std::vector<std::string> words;
  for (const auto& item : util::split(flat, ',')) {
    std::size_t b = 0, e = item.size();
    while (b < e && strip_lead(item[b])) ++b;
    while (e > b && strip_tail(item[e - 1])) --e;
    auto w = normalize_surface(item.substr(b, e - b));
    if (w.empty() || w.find(' ') != std::string::npos) continue;  // single-token substitutes only
    if (std::find(words.begin(), words.end(), w) == words.end()) words.push_back(std::move(w));
  }
  return words;
}

class CandidateBackend {
 public:
  virtual ~CandidateBackend() = default;
  virtual std::string id() const = 0;
  virtual std::vector<Candidate> generate(const ComplexSpan& span, std::size_t k) = 0;
};

inline double rank_score(std::size_t rank) { return 1.0 / static_cast<double>(rank + 1); }

class ThesaurusBackend : public CandidateBackend {
 public:
  explicit ThesaurusBackend(WordTable table, std::string name = "thesaurus")
      : table_(std::move(table)), name_(std::move(name)) {}
  std::string id() const override { return name_; }
  std::vector<Candidate> generate(const ComplexSpan& span, std::size_t k) override {
    const auto key = normalize_surface(span.word);
    auto it = table_.find(key);
    for (const auto& lemma : morph::lemma_candidates(key)) {
      if (it != table_.end()) break;
      it = table_.find(lemma);
    }
    std::vector<Candidate> out;
    if (it == table_.end()) return out;
    for (std::size_t i = 0; i < it->second.size() && out.size() < k; ++i)
      out.push_back({it->second[i], rank_score(i), name_, std::nullopt});
    return out;
  }

 private:
  WordTable table_;
  std::string name_;
};

class LlmCandidateBackend : public CandidateBackend {
 public:
  LlmCandidateBackend(TextBackend& text, RetryPolicy retry = {}) : text_(text), retry_(std::move(retry)) {}
  std::string id() const override { return text_.name(); }
  std::vector<Candidate> generate(const ComplexSpan& span, std::size_t k) override {
    const auto prompt = render_synonym_prompt(span.word, span.sentence, std::min<std::size_t>(k, 3));
    const auto outcome = call_with_retry(text_, prompt, 0, retry_);
    if (!outcome.text) throw BackendFailure(*outcome.failure, outcome.message);
    std::vector<Candidate> out;
    for (const auto& w : parse_candidate_response(*outcome.text)) {
      if (out.size() >= k) break;
      out.push_back({w, rank_score(out.size()), text_.name(), std::nullopt});
    }
    return out;
  }

 private:
  TextBackend& text_;
  RetryPolicy retry_;
};

/// Union of each backend's top-k. Repeated words keep the best score and list every source.
inline std::vector<Candidate> generate_candidates(const ComplexSpan& span,
                                                  const std::vector<CandidateBackend*>& backends, std::size_t k,
                                                  std::vector<std::string>* errors = nullptr) {
  if (backends.empty()) throw Error("simplify.no_backends", "no candidate backend configured");
  if (k < 1) throw Error("simplify.bad_k", "k must be at least 1");
  const auto original = normalize_surface(span.word);
  std::vector<Candidate> merged;
  std::size_t failures = 0;
  std::string last_error;
  for (auto* b : backends) {
    std::vector<Candidate> got;
    try {
      got = b->generate(span, k);
    } catch (const Error& e) {
      ++failures;
      last_error = b->id() + ": " + e.what();
      if (errors) errors->push_back(last_error);
      continue;
    }
    if (got.size() > k) got.resize(k);
    for (auto& c : got) {
      c.word = normalize_surface(c.word);
      if (c.word.empty() || c.word == original || c.word.find(' ') != std::string::npos) continue;
      const auto it = std::find_if(merged.begin(), merged.end(), [&](const Candidate& m) { return m.word == c.word; });
      if (it == merged.end()) {
        merged.push_back(std::move(c));
      } else {
        it->score = std::max(it->score, c.score);
        if (it->source.find(c.source) == std::string::npos) it->source += "+" + c.source;
      }
    }
  }
  if (failures == backends.size()) throw Error("simplify.all_backends_failed", "every backend failed; last: " + last_error);
  return merged;
}

// ---------------------------------------------------------------------------
// Post-filter

namespace detail {

inline bool letters_only(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), util::is_ascii_alpha);
}

inline bool listed(const WordTable& table, const std::string& key, const std::string& value) {
  const auto it = table.find(key);
  return it != table.end() && std::find(it->second.begin(), it->second.end(), value) != it->second.end();
}

inline bool is_antonym(const WordTable& antonyms, const std::string& original, const std::string& cand) {
  std::vector<std::string> forms{original};
  for (auto& l : morph::lemma_candidates(original)) forms.push_back(std::move(l));
  for (const auto& f : forms)
    if (listed(antonyms, f, cand) || listed(antonyms, cand, f)) return true;
  return false;
}

}  // namespace detail

/// First rule (in documented order) that removes `cand`, or nullopt when it survives.
inline std::optional<TraceEntry> filter_reason(const Candidate& cand, const ComplexSpan& span, const Lexicon& lex,
                                               const WordTable& antonyms) {
  const auto original = normalize_surface(span.word);
  const auto hit = lex.lookup(cand.word);
  if (!hit && !detail::letters_only(cand.word)) return TraceEntry{cand.word, "non_word", "not in lexicon and not a word form"};
  if (detail::is_antonym(antonyms, original, cand.word)) return TraceEntry{cand.word, "antonym", "antonym of " + original};
  if (morph::same_family(original, cand.word)) return TraceEntry{cand.word, "same_family", "same lemma family as " + original};
  if (hit && hit->aoa >= span.aoa)
    return TraceEntry{cand.word, "not_simpler",
                      "AoA " + util::fixed(hit->aoa, 2) + " >= " + util::fixed(span.aoa, 2)};
  return std::nullopt;
}

/// AoA-known first, then score (desc), AoA (asc), word.
inline bool candidate_rank_less(const Candidate& a, const Candidate& b) {
  if (a.aoa.has_value() != b.aoa.has_value()) return a.aoa.has_value();
  if (a.score != b.score) return a.score > b.score;
  if (a.aoa && b.aoa && *a.aoa != *b.aoa) return *a.aoa < *b.aoa;
  return a.word < b.word;
}

inline CandidateList postfilter(const std::vector<Candidate>& cands, const ComplexSpan& span, const Lexicon& lex,
                                const WordTable& antonyms = {}) {
  CandidateList out;
  out.original = span;
  for (const auto& c : cands) {
    if (auto why = filter_reason(c, span, lex, antonyms)) {
      out.trace.push_back(std::move(*why));
      continue;
    }
    Candidate kept = c;
    if (const auto hit = lex.lookup(c.word)) kept.aoa = hit->aoa;
    else kept.aoa.reset();
    out.candidates.push_back(std::move(kept));
  }
  std::sort(out.candidates.begin(), out.candidates.end(), candidate_rank_less);
  return out;
}

// ---------------------------------------------------------------------------
// Story rewriting

/// Copies the capitalization pattern of `original` onto `replacement`.
inline std::string match_case(std::string_view original, std::string_view replacement) {
  std::string out(replacement);
  std::size_t letters = 0, upper = 0;
  for (char c : original)
    if (util::is_ascii_alpha(c)) {
      ++letters;
      upper += util::is_ascii_upper(c) ? 1 : 0;
    }
  if (letters > 1 && upper == letters) {
    for (auto& c : out) c = util::ascii_upper(c);
  } else if (!original.empty() && util::is_ascii_upper(original[0]) && !out.empty()) {
    out[0] = util::ascii_upper(out[0]);
  }
  return out;
}

struct SpanResult {
  CandidateList list;
  std::optional<std::string> substitute;  // nullopt: unresolvable
};

struct SimplifiedStory {
  std::string id;
  std::string original;
  std::string simplified;
  std::vector<SpanResult> spans;
};

struct SimplifyOptions {
  ComplexOptions complex;
  std::size_t k = 3;
  bool exempt_targets = true;
};

inline SimplifiedStory simplify_story(const StoryRecord& story, const Lexicon& lex,
                                      const std::vector<CandidateBackend*>& backends, const WordTable& antonyms = {},
                                      const SimplifyOptions& opts = {}) {
  const auto doc = tokenize(story.text);
  SimplifiedStory out{story.id, story.text, story.text, {}};
  const auto spans =
      identify_complex(doc, lex, opts.exempt_targets ? story.target_words : std::vector<std::string>{}, opts.complex);
  if (spans.empty()) return out;

  std::map<std::pair<std::size_t, std::string>, std::string> replace;
  for (const auto& span : spans) {
    SpanResult r{postfilter(generate_candidates(span, backends, opts.k), span, lex, antonyms), std::nullopt};
    if (!r.list.candidates.empty() && r.list.candidates.front().aoa) {
      r.substitute = r.list.candidates.front().word;
      replace[{span.sentence_idx, normalize_surface(span.word)}] = *r.substitute;
    }
    out.spans.push_back(std::move(r));
  }
  std::string text;
  std::size_t pos = 0;
  for (const auto& t : doc.tokens) {
    if (!t.is_word()) continue;
    const auto it = replace.find({t.sentence_idx, t.lower});
    if (it == replace.end()) continue;
    text.append(story.text, pos, t.span.begin - pos);
    text += match_case(t.surface, it->second);
    pos = t.span.end;
  }
  text.append(story.text, pos, std::string::npos);
  out.simplified = std::move(text);
  return out;
}

inline json candidate_list_to_json(const CandidateList& l) {
  json cands = json::array(), trace = json::array();
  for (const auto& c : l.candidates) {
    json j = {{"word", c.word}, {"score", c.score}, {"source", c.source}};
    j["aoa"] = c.aoa ? json(*c.aoa) : json(nullptr);
    cands.push_back(std::move(j));
  }
  for (const auto& t : l.trace) trace.push_back({{"word", t.word}, {"rule", t.rule}, {"detail", t.detail}});
  return {{"sentence_idx", l.original.sentence_idx},
          {"sentence", l.original.sentence},
          {"word", l.original.word},
          {"span", {l.original.span.begin, l.original.span.end}},
          {"aoa", l.original.aoa},
          {"candidates", cands},
          {"trace", trace}};
}

inline json simplified_to_json(const SimplifiedStory& s, bool with_trace) {
  json spans = json::array();
  for (const auto& r : s.spans) {
    auto j = candidate_list_to_json(r.list);
    if (!with_trace) j.erase("trace");
    j["substitute"] = r.substitute ? json(*r.substitute) : json(nullptr);
    spans.push_back(std::move(j));
  }
  return {{"id", s.id}, {"text", s.original}, {"simplified", s.simplified}, {"spans", spans}};
}

}  // namespace kidlex

#endif  // KIDLEX_SIMPLIFY_HPP
