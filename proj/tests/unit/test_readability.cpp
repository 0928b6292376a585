#include <gtest/gtest.h>

#include "kidlex/readability.hpp"

using namespace kidlex;

namespace {
constexpr double kTol = 1e-9;
}

TEST(Readability, CatSatOnTheMat) {
  const auto doc = tokenize("The cat sat on the mat.");
  const auto stats = text_stats(doc);
  EXPECT_EQ(stats.words, 6u);
  EXPECT_EQ(stats.sentences, 1u);
  EXPECT_EQ(stats.syllables, 6u);
  EXPECT_EQ(stats.characters, 17u);
  EXPECT_EQ(stats.hard_words, 0u);
  EXPECT_NEAR(flesch_reading_ease(doc), 116.145, kTol);
  EXPECT_NEAR(flesch_kincaid_grade(doc), -1.45, kTol);
  EXPECT_NEAR(gunning_fog(doc), 2.4, kTol);
  EXPECT_NEAR(automated_readability_index(doc), -5.085, kTol);
}

TEST(Readability, GunningFogWithHardWords) {
  TextStats s{.words = 10, .sentences = 1, .syllables = 16, .characters = 50, .hard_words = 2};
  EXPECT_NEAR(gunning_fog(s), 12.0, kTol);
}

TEST(Readability, SingleLetterSentence) {
  EXPECT_NEAR(automated_readability_index(tokenize("I.")), -16.22, kTol);
}

TEST(Readability, EmptyDocumentIsError) {
  EXPECT_THROW(flesch_reading_ease(tokenize("")), Error);
  EXPECT_THROW(gunning_fog(tokenize("...")), Error);
  EXPECT_THROW(readability(TextStats{}), Error);
}

TEST(Readability, DuplicationInvariance) {
  const std::string text =
      "Amanda found a tiny turtle near the pond. It was understanding and kind! Did it swim?";
  const auto once = readability(tokenize(text));
  const auto twice = readability(tokenize(text + " " + text));
  EXPECT_NEAR(once.fre, twice.fre, kTol);
  EXPECT_NEAR(once.fkgl, twice.fkgl, kTol);
  EXPECT_NEAR(once.gfi, twice.gfi, kTol);
  EXPECT_NEAR(once.ari, twice.ari, kTol);
  EXPECT_EQ(twice.stats.words, 2 * once.stats.words);
}

TEST(Readability, FkglIncreasesWithSyllables) {
  TextStats s{.words = 12, .sentences = 2, .syllables = 15, .characters = 50, .hard_words = 0};
  const double before = flesch_kincaid_grade(s);
  ++s.syllables;
  EXPECT_GT(flesch_kincaid_grade(s), before);
}

TEST(Readability, AriIgnoresPunctuationInsertion) {
  const double plain = automated_readability_index(tokenize("The cat sat on the mat."));
  const double punct = automated_readability_index(tokenize("The cat, sat; on (the) mat."));
  EXPECT_NEAR(plain, punct, kTol);
}

TEST(Readability, ScoresArePureFunctionsOfStats) {
  const auto a = readability(tokenize("The dog ran to the big red barn."));
  const auto b = readability(tokenize("A cat sat at the old tin shed."));
  ASSERT_EQ(a.stats.words, b.stats.words);
  if (a.stats.syllables == b.stats.syllables && a.stats.characters == b.stats.characters &&
      a.stats.hard_words == b.stats.hard_words) {
    EXPECT_EQ(a.fre, b.fre);
    EXPECT_EQ(a.ari, b.ari);
  }
  EXPECT_GT(a.dictionary_hit_rate(), 0.99);
}
