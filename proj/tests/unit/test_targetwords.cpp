#include <gtest/gtest.h>

#include "kidlex/targetwords.hpp"

using namespace kidlex;

namespace {

LexiconEntry entry(std::string w, double aoa, std::optional<double> conc, std::vector<std::string> pos) {
  return {std::move(w), aoa, conc, std::move(pos), std::nullopt};
}

Lexicon band_lexicon() {
  return Lexicon::from_entries({
      entry("glacier", 7.2, 4.8, {"noun"}),
      entry("juggle", 7.0, 4.2, {"verb"}),
      entry("juggler", 7.8, 4.6, {"noun"}),  // same family as juggle, higher AoA
      entry("juggled", 7.5, 4.0, {"verb"}),
      entry("quickly", 6.5, 3.9, {"adverb"}),
      entry("brush", 6.8, 4.9, {"noun", "verb"}),
      entry("idea", 6.9, 1.8, {"noun"}),
      entry("wrinkly", 7.9, std::nullopt, {"adjective"}),
      entry("bald", 6.3, 4.4, {"adjective"}),
      entry("cat", 2.9, 5.0, {"noun"}),
      entry("ice cream", 6.1, 5.0, {"noun"}),
      entry("tundra", 9.5, 4.5, {"noun"}),
      entry("edge", 9.0, 4.0, {"noun"}),
      entry("of", 6.0, 4.0, {"preposition"}),
  });
}

TargetCandidate rated(std::string w, std::string pos, double aoa, std::vector<int> l, std::vector<int> i,
                      std::vector<int> a) {
  return {std::move(w), std::move(pos), aoa, 4.5, std::move(l), std::move(i), std::move(a)};
}

}  // namespace

TEST(BandFilter, KeepsAndDrops) {
  BandFilterTrace trace;
  const auto out = band_filter(band_lexicon(), {}, &trace);
  std::vector<std::string> words;
  for (const auto& c : out) words.push_back(c.lemma);
  EXPECT_EQ(words, (std::vector<std::string>{"bald", "edge", "glacier", "juggle"}));
  EXPECT_EQ(trace.dropped_adverb, 1u);
  EXPECT_EQ(trace.dropped_multi_pos, 1u);
  EXPECT_EQ(trace.dropped_concreteness, 2u);
  EXPECT_EQ(trace.dropped_family, 2u);
  EXPECT_EQ(trace.dropped_not_single_word, 1u);
  EXPECT_EQ(trace.dropped_other_pos, 1u);
  for (const auto& c : out) {
    EXPECT_GE(c.aoa, 6.0);
    EXPECT_LE(c.aoa, 9.0);
    EXPECT_TRUE(band_lexicon().contains(c.lemma));
  }
}

TEST(BandFilter, ConfigurableCutoffs) {
  BandFilterOptions loose;
  loose.min_concreteness = 1.0;
  loose.hi = 10.0;
  const auto out = band_filter(band_lexicon(), loose);
  const auto has = [&](std::string_view w) {
    return std::any_of(out.begin(), out.end(), [&](const TargetCandidate& c) { return c.lemma == w; });
  };
  EXPECT_TRUE(has("idea"));
  EXPECT_TRUE(has("tundra"));
  EXPECT_FALSE(has("wrinkly"));  // missing concreteness stays dropped
}

TEST(BandFilter, RequiresPosAndConcreteness) {
  const auto plain = Lexicon::from_entries({{"glacier", 7.2}});
  EXPECT_THROW(band_filter(plain), Error);
  const auto pos_only = Lexicon::from_entries({entry("glacier", 7.2, std::nullopt, {"noun"})});
  try {
    band_filter(pos_only);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "targets.missing_concreteness");
  }
}

TEST(Aggregate, MinOfMeans) {
  const auto s = aggregate_scores({rated("a", "noun", 7, {5, 5}, {4, 4}, {5, 5})});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s[0].means[0], 5);
  EXPECT_DOUBLE_EQ(s[0].means[1], 4);
  EXPECT_DOUBLE_EQ(s[0].means[2], 5);
  EXPECT_DOUBLE_EQ(s[0].composite, 4);
}

TEST(Aggregate, CompositeVariantsAndSingleAnnotator) {
  const std::vector<TargetCandidate> c = {rated("a", "noun", 7, {3}, {4}, {1})};
  const auto mn = aggregate_scores(c);
  EXPECT_DOUBLE_EQ(mn[0].means[0], 3);
  EXPECT_LE(mn[0].composite, mn[0].means[2]);
  EXPECT_DOUBLE_EQ(aggregate_scores(c, Composite::mean)[0].composite, 8.0 / 3.0);
  EXPECT_DOUBLE_EQ(aggregate_scores(c, Composite::product)[0].composite, 12.0);
  EXPECT_THROW(aggregate_scores({rated("b", "noun", 7, {}, {4}, {1})}), Error);
}

TEST(Quota, TopKeptWithTieBreaks) {
  const auto scored = aggregate_scores({rated("c5", "noun", 8, {5}, {5}, {5}), rated("c4", "noun", 8, {4}, {4}, {4}),
                                        rated("c3", "noun", 8, {3}, {3}, {3})});
  const auto top = select_quota(scored, {{"noun", 2}});
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].candidate.lemma, "c4");
  EXPECT_EQ(top[1].candidate.lemma, "c5");

  const auto tied = aggregate_scores({rated("zebra", "noun", 6.5, {4}, {4}, {4}),
                                      rated("apple", "noun", 7.5, {4}, {4}, {4})});
  const auto one = select_quota(tied, {{"noun", 1}});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].candidate.lemma, "zebra");  // lower AoA wins the tie

  EXPECT_THROW(select_quota(tied, {{"verb", 1}}), Error);
}

TEST(Quota, Parsing) {
  EXPECT_EQ(parse_quota("noun=150,verb=50,adj=50"), default_quota());
  EXPECT_THROW(parse_quota("noun"), Error);
  EXPECT_THROW(parse_quota(""), Error);
}

TEST(BundledList, ShapeAndFullMarksSelection) {
  const auto list = load_target_list();
  ASSERT_EQ(list.size(), 250u);
  std::map<std::string, int> per_pos;
  for (const auto& t : list) ++per_pos[t.pos];
  EXPECT_EQ(per_pos["noun"], 150);
  EXPECT_EQ(per_pos["verb"], 50);
  EXPECT_EQ(per_pos["adjective"], 50);
  EXPECT_EQ(list.front().word, "accordion");
  EXPECT_EQ(list.back().word, "unzip");

  std::vector<TargetCandidate> cands;
  for (const auto& t : list) cands.push_back(rated(t.word, t.pos, 7.0, {5}, {5}, {5}));
  const auto final_list = select_quota(aggregate_scores(cands), default_quota());
  EXPECT_EQ(final_list.size(), 250u);
  const auto has = [&](std::string_view w) {
    return std::any_of(final_list.begin(), final_list.end(),
                       [&](const ScoredCandidate& s) { return s.candidate.lemma == w; });
  };
  EXPECT_TRUE(has("accordion"));
  EXPECT_TRUE(has("unzip"));
  EXPECT_TRUE(std::is_sorted(final_list.begin(), final_list.end(), [](const auto& a, const auto& b) {
    return a.candidate.lemma < b.candidate.lemma;
  }));
}

TEST(Ratings, LoadAndAttach) {
  const std::string path = ::testing::TempDir() + "/ratings.csv";
  util::write_file(path,
                   "word,annotator,learnability,imageability,appropriateness\n"
                   "glacier,a1,5,5,4\nGlacier,a2,4,5,4\njuggle,a1,3,3,5\n");
  const auto ratings = load_ratings(path);
  ASSERT_EQ(ratings.size(), 3u);
  auto cands = band_filter(band_lexicon());
  attach_ratings(cands, ratings);
  const auto g = std::find_if(cands.begin(), cands.end(), [](const auto& c) { return c.lemma == "glacier"; });
  ASSERT_NE(g, cands.end());
  EXPECT_EQ(g->learnability, (std::vector<int>{5, 4}));

  util::write_file(path, "word,annotator,learnability,imageability,appropriateness\nglacier,a1,6,5,4\n");
  try {
    load_ratings(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "targets.bad_rating");
  }
}

TEST(TargetSets, DeterministicDistinctFives) {
  std::vector<std::string> words;
  for (const auto& t : load_target_list()) words.push_back(t.word);
  const auto a = draw_target_sets(words, 60, 42);
  const auto b = draw_target_sets(words, 60, 42);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, draw_target_sets(words, 60, 43));
  ASSERT_EQ(a.size(), 60u);
  for (const auto& s : a) {
    ASSERT_EQ(s.size(), 5u);
    EXPECT_EQ(std::set<std::string>(s.begin(), s.end()).size(), 5u);
  }
  EXPECT_THROW(draw_target_sets({"a", "b", "c", "d"}, 1, 1), Error);
}
