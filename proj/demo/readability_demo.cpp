// Readability scores for the text given on the command line, or stdin.
#include <iostream>
#include <iterator>

#include "kidlex/kidlex.hpp"

int main(int argc, char** argv) {
  std::string text;
  for (int i = 1; i < argc; ++i) text += (i > 1 ? " " : "") + std::string(argv[i]);
  if (text.empty()) text.assign(std::istreambuf_iterator<char>(std::cin), {});
  try {
    const auto r = kidlex::readability(kidlex::tokenize(text));
    std::cout << "words " << r.stats.words << ", sentences " << r.stats.sentences << ", syllables "
              << r.stats.syllables << ", hard words " << r.stats.hard_words << "\n"
              << "FRE  " << kidlex::util::fixed(r.fre, 2) << "\n"
              << "FKGL " << kidlex::util::fixed(r.fkgl, 2) << "\n"
              << "GFI  " << kidlex::util::fixed(r.gfi, 2) << "\n"
              << "ARI  " << kidlex::util::fixed(r.ari, 2) << "\n";
  } catch (const kidlex::Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return 1;
  }
}
