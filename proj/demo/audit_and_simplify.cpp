// Audits one story against a toy lexicon, then rewrites its complex words.
#include <iostream>

#include "kidlex/kidlex.hpp"

using namespace kidlex;

int main() {
  const auto lex = Lexicon::from_entries({
      {"the", 3.0, {}, {}, {}},      {"a", 2.9, {}, {}, {}},        {"dog", 2.5, {}, {}, {}},
      {"was", 3.5, {}, {}, {}},      {"found", 3.9, {}, {}, {}},    {"in", 2.9, {}, {}, {}},
      {"park", 4.1, {}, {}, {}},     {"enormous", 7.8, {}, {}, {}}, {"big", 3.0, {}, {}, {}},
      {"huge", 5.0, {}, {}, {}},     {"tiny", 4.4, {}, {}, {}},     {"kayak", 7.9, {}, {}, {}},
      {"lantern", 7.1, {}, {}, {}},  {"and", 3.2, {}, {}, {}},      {"they", 3.9, {}, {}, {}},
      {"saw", 3.6, {}, {}, {}},      {"bobcat", 8.2, {}, {}, {}},   {"jog", 6.6, {}, {}, {}},
      {"to", 3.3, {}, {}, {}},       {"liked", 3.7, {}, {}, {}},    {"moonlit", 8.8, {}, {}, {}},
      {"night", 3.4, {}, {}, {}},
  });
  StoryRecord story{"demo-1", "toy", "preschool", {"kayak", "lantern", "bobcat", "jog", "moonlit"},
                    "The dog found a kayak and a lantern in the park. They saw the enormous bobcat. "
                    "The dog liked to jog in the moonlit night.",
                    json::object()};

  const auto audit = audit_story(story, lex);
  std::cout << "valid " << std::boolalpha << audit.valid << ", appropriate " << audit.appropriate
            << ", average AoA " << util::fixed(audit.avg_aoa, 2) << ", highest " << audit.max_word << " ("
            << util::fixed(audit.max_aoa, 2) << ")\n";
  for (const auto& f : audit.inappropriate)
    std::cout << "  too hard: " << f.word << " (AoA " << util::fixed(f.aoa, 2) << ")\n";

  ThesaurusBackend thesaurus({{"enormous", {"huge", "tiny", "big"}}});
  const WordTable antonyms = {{"enormous", {"tiny"}}};
  const auto result = simplify_story(story, lex, {&thesaurus}, antonyms);
  for (const auto& sp : result.spans) {
    std::cout << "  " << sp.list.original.word << " -> " << sp.substitute.value_or("(none)") << "\n";
    for (const auto& t : sp.list.trace) std::cout << "    dropped " << t.word << ": " << t.rule << "\n";
  }
  std::cout << result.simplified << "\n";
}
