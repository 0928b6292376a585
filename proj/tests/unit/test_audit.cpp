#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "kidlex/audit.hpp"

using namespace kidlex;

namespace {

Lexicon story_lexicon() {
  return Lexicon::from_entries({{"the", 2.0},     {"a", 2.0},      {"cat", 2.9},   {"dog", 3.1},
                                {"saw", 3.0},     {"see", 3.0},    {"big", 2.0},   {"and", 2.5},
                                {"juggle", 7.5},  {"glacier", 8.1}, {"wrinkly", 6.8}, {"unzip", 6.4},
                                {"xylophone", 7.9}, {"ran", 3.0},  {"run", 3.0},   {"happy", 3.2},
                                {"enormous", 8.9}, {"x", 9.0},     {"she", 2.2},   {"liked", 3.4},
                                {"like", 3.4}});
}

StoryRecord story(std::string id, std::string text, std::vector<std::string> targets = {},
                  std::string model = "m", std::string prompt = "preschool") {
  StoryRecord s;
  s.id = std::move(id);
  s.model = std::move(model);
  s.prompt_id = std::move(prompt);
  s.target_words = std::move(targets);
  s.text = std::move(text);
  return s;
}

const std::vector<std::string> kTargets = {"juggle", "glacier", "wrinkly", "unzip", "xylophone"};

}  // namespace

TEST(AuditStory, AllTargetsPresentIsValid) {
  const auto lex = story_lexicon();
  const auto s = story("s1",
                       "The cat juggled a xylophone. She saw a wrinkly glacier and the dog ran. "
                       "A cat liked to unzip the big dog.",
                       kTargets);
  const auto r = audit_story(s, lex);
  EXPECT_TRUE(r.valid);
  EXPECT_TRUE(r.missing_targets.empty());
  // Targets are exempt, so every flagged word is a target and the story stays appropriate.
  EXPECT_TRUE(r.appropriate);
  EXPECT_DOUBLE_EQ(r.max_aoa, 8.1);
  EXPECT_EQ(r.max_word, "glacier");
}

TEST(AuditStory, RemovingEveryOccurrenceOfOneTargetInvalidates) {
  const auto lex = story_lexicon();
  const auto s = story("s1", "The cat juggled a xylophone. She saw a wrinkly dog. A cat liked to unzip it.",
                       kTargets);
  const auto r = audit_story(s, lex);
  EXPECT_FALSE(r.valid);
  EXPECT_EQ(r.missing_targets, (std::vector<std::string>{"glacier"}));
}

TEST(AuditStory, ExactModeRejectsInflectedTarget) {
  const auto lex = story_lexicon();
  const auto s = story("s1", "The cat juggled a xylophone. A wrinkly glacier. Unzip it.", kTargets);
  AuditOptions exact;
  exact.lemma_target_match = false;
  EXPECT_TRUE(audit_story(s, lex).valid);
  const auto r = audit_story(s, lex, exact);
  EXPECT_FALSE(r.valid);
  EXPECT_EQ(r.missing_targets, (std::vector<std::string>{"juggle"}));
}

TEST(AuditStory, ThreeTokenArithmetic) {
  const auto lex = Lexicon::from_entries({{"big", 2.0}, {"dog", 4.0}, {"x", 9.0}});
  const auto r = audit_story(story("t", "Big dog x."), lex);
  EXPECT_DOUBLE_EQ(r.avg_aoa, 5.0);
  EXPECT_EQ(r.max_word, "x");
  EXPECT_DOUBLE_EQ(r.max_aoa, 9.0);
  EXPECT_FALSE(r.appropriate);
  ASSERT_EQ(r.inappropriate.size(), 1u);
  EXPECT_EQ(r.inappropriate[0].word, "x");
  EXPECT_TRUE(r.valid);  // no targets assigned
}

TEST(AuditStory, TargetExemptionToggle) {
  const auto lex = story_lexicon();
  const auto s = story("g", "The cat saw a glacier.", {"glacier", "cat", "saw", "the", "a"});
  EXPECT_TRUE(audit_story(s, lex).appropriate);
  AuditOptions no_exempt;
  no_exempt.target_exemption = false;
  EXPECT_FALSE(audit_story(s, lex, no_exempt).appropriate);
}

TEST(AuditStory, ThresholdOperator) {
  const auto lex = Lexicon::from_entries({{"cat", 2.0}, {"six", 6.0}});
  const auto s = story("o", "Cat six.");
  EXPECT_TRUE(audit_story(s, lex).appropriate);  // strict: 6 is not above 6
  AuditOptions ge;
  ge.op = ThresholdOp::greater_equal;
  EXPECT_FALSE(audit_story(s, lex, ge).appropriate);
}

TEST(AuditStory, OovExcludedAndReported) {
  const auto lex = story_lexicon();
  const auto r = audit_story(story("o", "The zorble saw a cat."), lex);
  EXPECT_EQ(r.oov, (std::vector<std::string>{"zorble"}));
  EXPECT_DOUBLE_EQ(r.coverage, 0.8);
  EXPECT_DOUBLE_EQ(r.avg_aoa, (2.0 + 3.0 + 2.0 + 2.9) / 4.0);
}

TEST(AuditStory, TypesMode) {
  const auto lex = story_lexicon();
  AuditOptions types;
  types.types_mode = true;
  const auto s = story("t", "The the the x.");
  EXPECT_DOUBLE_EQ(audit_story(s, lex).avg_aoa, (2.0 * 3 + 9.0) / 4.0);
  EXPECT_DOUBLE_EQ(audit_story(s, lex, types).avg_aoa, 5.5);
}

TEST(AuditStory, Errors) {
  const auto lex = story_lexicon();
  try {
    audit_story(story("e", "   "), lex);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "audit.empty_text");
  }
  try {
    audit_story(story("z", "Zorble quib."), lex);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "audit.zero_coverage");
  }
}

TEST(AuditProperty, RandomStories) {
  const auto lex = story_lexicon();
  const std::vector<std::string> vocab = {"the", "a", "cat", "dog", "saw", "big", "and", "ran",
                                          "happy", "she", "liked", "zorble", "enormous", "x"};
  std::mt19937 rng(11);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<std::string> targets = kTargets;
    std::string text;
    const int n = 3 + static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) {
      text += (rng() % 5 == 0) ? targets[rng() % 5] : vocab[rng() % vocab.size()];
      text += (rng() % 6 == 0) ? ". " : " ";
    }
    text += "cat.";
    const auto s = story("r", text, targets);
    const auto with = audit_story(s, lex);
    EXPECT_LE(with.avg_aoa, with.max_aoa);
    AuditOptions no_exempt;
    no_exempt.target_exemption = false;
    const auto without = audit_story(s, lex, no_exempt);
    if (without.appropriate) EXPECT_TRUE(with.appropriate);

    auto doubled = s;
    doubled.text = text + " " + text;
    EXPECT_NEAR(audit_story(doubled, lex).avg_aoa, with.avg_aoa, 1e-12);

    auto plus = s;
    plus.text = text + " Enormous.";
    EXPECT_FALSE(audit_story(plus, lex).appropriate);
  }
}

TEST(Corpus, ParseAndRoundTrip) {
  std::vector<StoryRecord> stories = {story("a", "The cat.", kTargets), story("b", "A dog.")};
  stories[0].meta = {{"backend", "mock"}};
  const auto text = corpus_to_string(stories);
  EXPECT_EQ(parse_corpus(text), stories);
}

TEST(Corpus, RejectsDuplicateIdsAndWrongTargetCount) {
  const auto line = story_to_line(story("a", "The cat."));
  try {
    parse_corpus(line + "\n" + line + "\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "corpus.duplicate_id");
  }
  EXPECT_THROW(parse_corpus(story_to_line(story("b", "x", {"one", "two"}))), Error);
  EXPECT_THROW(parse_corpus("{not json}\n"), Error);
}

TEST(Summary, MeanOfHighestAoa) {
  const auto lex = Lexicon::from_entries({{"cat", 2.0}, {"nine", 9.0}, {"more", 9.3}});
  const auto s = summarize_corpus({story("1", "Cat nine."), story("2", "Cat more.")}, lex);
  ASSERT_EQ(s.cells.size(), 1u);
  EXPECT_DOUBLE_EQ(s.cells[0].max_aoa, 9.15);
  EXPECT_EQ(summary_row(s.cells[0])[3], "9.15");
}

TEST(Summary, PercentFormatting) {
  const auto lex = story_lexicon();
  std::vector<StoryRecord> stories;
  for (int i = 0; i < 50; ++i) {
    const bool valid = i < 45;
    stories.push_back(story("s" + std::to_string(i),
                            valid ? "The cat juggled a xylophone. A wrinkly glacier. Unzip it."
                                  : "The cat saw a dog.",
                            kTargets, "InstructGPT", "preschool"));
  }
  const auto s = summarize_corpus(stories, lex);
  ASSERT_EQ(s.cells.size(), 1u);
  EXPECT_DOUBLE_EQ(s.cells[0].pct_valid, 90.0);
  EXPECT_EQ(summary_row(s.cells[0])[4], "90%");
  EXPECT_EQ(summary_row(s.cells[0])[5], "100%");
  EXPECT_EQ(detail::percent(4.78), "4.78%");
}

TEST(Summary, CellOrderAndReorderInvariance) {
  const auto lex = story_lexicon();
  std::vector<StoryRecord> stories = {
      story("1", "The cat.", {}, "b", "child"),     story("2", "The dog.", {}, "a", "5yo"),
      story("3", "A cat x.", {}, "a", "preschool"), story("4", "The x.", {}, "b", "3yo"),
      story("5", "Big dog.", {}, "a", "preschool")};
  const auto s1 = summarize_corpus(stories, lex);
  ASSERT_EQ(s1.cells.size(), 4u);
  EXPECT_EQ(s1.cells[0].model, "a");
  EXPECT_EQ(s1.cells[0].prompt_id, "preschool");
  EXPECT_EQ(s1.cells[1].prompt_id, "5yo");
  EXPECT_EQ(s1.cells[2].prompt_id, "3yo");
  EXPECT_EQ(s1.cells[3].prompt_id, "child");
  std::reverse(stories.begin(), stories.end());
  const auto s2 = summarize_corpus(stories, lex, {}, 3);
  EXPECT_EQ(render_summary(s1, "csv"), render_summary(s2, "csv"));
  for (const auto& c : s1.cells) {
    EXPECT_GE(c.pct_valid, 0.0);
    EXPECT_LE(c.pct_appropriate, 100.0);
  }
}

TEST(Summary, RenderFormats) {
  const auto lex = story_lexicon();
  const auto s = summarize_corpus({story("1", "The cat saw a dog.")}, lex);
  const auto table = render_summary(s, "table");
  const auto header = table.substr(0, table.find('\n'));
  std::size_t pos = 0;
  for (const auto& col : summary_columns()) {
    const auto at = header.find(col, pos);
    ASSERT_NE(at, std::string::npos) << col;
    pos = at + col.size();
  }
  EXPECT_NE(table.find("AoA > 6.00"), std::string::npos);
  const auto csv = render_summary(s, "csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "Model,Prompt,Average AoA,Highest AoA,% Valid,% Appropriate,FRE,FKGL,GFI,ARI,n");
  const auto jsonl = render_summary(s, "jsonl");
  EXPECT_EQ(json::parse(jsonl.substr(0, jsonl.find('\n')))["model"], "m");
  EXPECT_THROW(render_summary(s, "xml"), Error);
  EXPECT_THROW(summarize_corpus({}, lex), Error);
}

TEST(Compare, IdenticalSummariesHaveZeroDeltas) {
  const auto lex = story_lexicon();
  const auto s = summarize_corpus({story("1", "The cat saw a dog.")}, lex);
  for (const auto& r : compare_corpora(s, s).rows) EXPECT_EQ(r.delta, 0.0);
}

TEST(Compare, FreDropAgainstGenerated) {
  CorpusSummary bfp, gen;
  bfp.label = "BfP";
  gen.label = "generated";
  bfp.cells.push_back({});
  gen.cells.push_back({});
  bfp.overall.fre = 89.37;
  gen.overall.fre = 74.22;
  const auto c = compare_corpora(bfp, gen, {Metric::fre});
  ASSERT_EQ(c.rows.size(), 1u);
  EXPECT_NEAR(c.rows[0].delta, -15.15, 1e-9);
  EXPECT_FALSE(c.rows[0].b_better);
  EXPECT_NE(render_comparison(c).find("-15.15"), std::string::npos);
}

TEST(Compare, SingleMetricEmitsOneChart) {
  const auto lex = story_lexicon();
  auto a = summarize_corpus({story("1", "The cat saw a dog.", {}, "BfP", "")}, lex);
  auto b = summarize_corpus({story("1", "The enormous cat.", {}, "gpt", "child")}, lex);
  const std::string dir = ::testing::TempDir() + "/charts_single";
  std::filesystem::remove_all(dir);
  const auto paths = emit_charts({&a, &b}, {Metric::fkgl}, dir);
  ASSERT_EQ(paths.size(), 1u);
  const auto svg = util::read_file(paths[0]);
  EXPECT_NE(svg.find("data-direction=\"down\""), std::string::npos);
  EXPECT_NE(svg.find(">BfP<"), std::string::npos);
  EXPECT_NE(svg.find(">gpt<"), std::string::npos);
  EXPECT_EQ(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator{}), 1);
}
