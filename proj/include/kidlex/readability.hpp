#ifndef KIDLEX_READABILITY_HPP
#define KIDLEX_READABILITY_HPP

// Classic readability formulas over document statistics.
//
//   FRE  = 206.835 - 1.015 * (words / sentences) - 84.6 * (syllables / words)
//   FKGL = 0.39 * (words / sentences) + 11.8 * (syllables / words) - 15.59
//   GFI  = 0.4 * ((words / sentences) + 100 * (hard_words / words))
//   ARI  = 4.71 * (characters / words) + 0.5 * (words / sentences) - 21.43
//
// "words" counts word and number tokens; "characters" counts alphanumeric code
// points of those tokens only. FRE is reported unclamped (it exceeds 100 for very
// short words/sentences); the conventional interpretation range is 0-100.

#include <string>
#include <vector>

#include "kidlex/textproc.hpp"

namespace kidlex {

struct TextStats {
  std::size_t words = 0;
  std::size_t sentences = 0;
  std::size_t syllables = 0;
  std::size_t characters = 0;
  std::size_t hard_words = 0;
  std::size_t dictionary_hits = 0;  // word tokens whose syllables came from the dictionary
  std::size_t word_tokens = 0;      // alphabetic word tokens (numbers excluded)
  friend bool operator==(const TextStats&, const TextStats&) = default;
};

struct ReadabilityReport {
  double fre = 0;
  double fkgl = 0;
  double gfi = 0;
  double ari = 0;
  TextStats stats;

  double dictionary_hit_rate() const {
    return stats.word_tokens ? static_cast<double>(stats.dictionary_hits) / stats.word_tokens : 0.0;
  }
};

inline TextStats text_stats(const Document& doc,
                            const SyllableCounter& counter = default_syllable_counter()) {
  TextStats s;
  s.sentences = doc.sentence_count;
  for (const auto& t : doc.tokens) {
    if (!t.counts_as_word()) continue;
    ++s.words;
    s.syllables += static_cast<std::size_t>(t.syllables);
    s.characters += static_cast<std::size_t>(t.characters);
    if (t.is_word()) {
      ++s.word_tokens;
      if (t.syllables_from_dictionary) ++s.dictionary_hits;
      if (is_hard_word(t, counter)) ++s.hard_words;
    }
  }
  return s;
}

namespace detail {
inline void require_nonempty(const TextStats& s) {
  if (s.words == 0 || s.sentences == 0)
    throw Error("readability.empty_document", "document needs at least one word and one sentence");
}
inline double asl(const TextStats& s) { return static_cast<double>(s.words) / static_cast<double>(s.sentences); }
inline double asw(const TextStats& s) { return static_cast<double>(s.syllables) / static_cast<double>(s.words); }
}  // namespace detail

inline double flesch_reading_ease(const TextStats& s) {
  detail::require_nonempty(s);
  return 206.835 - 1.015 * detail::asl(s) - 84.6 * detail::asw(s);
}

inline double flesch_kincaid_grade(const TextStats& s) {
  detail::require_nonempty(s);
  return 0.39 * detail::asl(s) + 11.8 * detail::asw(s) - 15.59;
}

inline double gunning_fog(const TextStats& s) {
  detail::require_nonempty(s);
  return 0.4 * (detail::asl(s) + 100.0 * static_cast<double>(s.hard_words) / static_cast<double>(s.words));
}

inline double automated_readability_index(const TextStats& s) {
  detail::require_nonempty(s);
  return 4.71 * (static_cast<double>(s.characters) / static_cast<double>(s.words)) +
         0.5 * detail::asl(s) - 21.43;
}

inline double flesch_reading_ease(const Document& doc) { return flesch_reading_ease(text_stats(doc)); }
inline double flesch_kincaid_grade(const Document& doc) { return flesch_kincaid_grade(text_stats(doc)); }
inline double gunning_fog(const Document& doc) { return gunning_fog(text_stats(doc)); }
inline double automated_readability_index(const Document& doc) {
  return automated_readability_index(text_stats(doc));
}

inline ReadabilityReport readability(const TextStats& stats) {
  ReadabilityReport r;
  r.stats = stats;
  r.fre = flesch_reading_ease(stats);
  r.fkgl = flesch_kincaid_grade(stats);
  r.gfi = gunning_fog(stats);
  r.ari = automated_readability_index(stats);
  return r;
}

inline ReadabilityReport readability(const Document& doc,
                                     const SyllableCounter& counter = default_syllable_counter()) {
  return readability(text_stats(doc, counter));
}

}  // namespace kidlex

#endif  // KIDLEX_READABILITY_HPP
