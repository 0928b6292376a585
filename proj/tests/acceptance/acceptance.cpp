// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "kidlex/annotate.hpp"
#include "kidlex/cli.hpp"

using namespace kidlex;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Records the first failure; later checks still run so the detail names the first problem.
class Check {
 public:
  bool operator()(bool cond, const std::string& what) {
    if (!cond && ok_) {
      ok_ = false;
      first_ = what;
    }
    return cond;
  }
  Outcome done(std::string summary) const { return ok_ ? Outcome{true, std::move(summary)} : Outcome{false, first_}; }

 private:
  bool ok_ = true;
  std::string first_;
};

std::string fixture(const std::string& name) { return std::string(KIDLEX_FIXTURES) + "/" + name; }

double asl(const TextStats& s) { return static_cast<double>(s.words) / static_cast<double>(s.sentences); }
double asw(const TextStats& s) { return static_cast<double>(s.syllables) / static_cast<double>(s.words); }

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

// Pseudo-words ending in a, i, o or u: no inflection rule applies to them.
std::vector<std::string> pseudo_words(std::size_t n, std::mt19937_64& rng, std::set<std::string>& used) {
  static const std::string cons = "bdfgklmnprtvz", vow = "aeiou", last = "aiou";
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string w;
    const int syl = 2 + static_cast<int>(rng() % 2);
    for (int i = 0; i < syl; ++i) {
      w += cons[rng() % cons.size()];
      w += (i + 1 == syl ? last[rng() % last.size()] : vow[rng() % vow.size()]);
    }
    if (used.insert(w).second) out.push_back(w);
  }
  return out;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// ---------------------------------------------------------------------------

Outcome readability_oracle() {
  Check check;
  const auto docs = json::parse(util::read_file(fixture("readability_docs.json")));
  const auto expected = json::parse(util::read_file(fixture("readability_oracle.json")));
  check(docs.size() == 20 && expected.size() == 20, "fixture must hold 20 documents");
  double worst = 0;
  for (std::size_t i = 0; i < docs.size() && i < expected.size(); ++i) {
    const auto r = readability(tokenize(docs[i]["text"].get<std::string>()));
    const auto& e = expected[i]["scores"];
    const double got[4] = {r.fre, r.fkgl, r.gfi, r.ari};
    const char* keys[4] = {"fre", "fkgl", "gfi", "ari"};
    for (int k = 0; k < 4; ++k) {
      const double d = std::fabs(got[k] - e[keys[k]].get<double>());
      worst = std::max(worst, d);
      check(d <= 1e-9, expected[i]["id"].get<std::string>() + " " + keys[k] + " off by " + util::shortest(d));
    }
  }
  const auto cat = readability(tokenize("The cat sat on the mat."));
  check(near(cat.fre, 116.145, 1e-9), "FRE(The cat sat on the mat.) = " + util::shortest(cat.fre));
  check(near(cat.fkgl, -1.45, 1e-9), "FKGL(The cat sat on the mat.) = " + util::shortest(cat.fkgl));
  return check.done("20 documents, max deviation " + util::shortest(worst));
}

Outcome formula_constants() {
  Check check;
  const auto stats = [](std::size_t w, std::size_t s, std::size_t syl, std::size_t ch, std::size_t hard) {
    TextStats t;
    t.words = w;
    t.sentences = s;
    t.syllables = syl;
    t.characters = ch;
    t.hard_words = hard;
    return t;
  };
  const auto slope = [](double f1, double f0, double x1, double x0) { return (f1 - f0) / (x1 - x0); };
  const auto expect = [&](double got, double want, const std::string& what) {
    check(near(got, want, 1e-9), what + " = " + util::shortest(got) + ", expected " + util::shortest(want));
  };

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t w = 40 + rng() % 400, s = 2 + rng() % 20, syl = w + rng() % w, ch = 3 * w + rng() % (3 * w);
    const std::size_t hard = rng() % (w / 4);
    const auto base = stats(w, s, syl, ch, hard);
    const auto more_syl = stats(w, s, syl + 1 + rng() % 30, ch, hard);
    const auto more_sent = stats(w, s + 1 + rng() % 5, syl, ch, hard);
    const auto more_ch = stats(w, s, syl, ch + 1 + rng() % 50, hard);
    const auto more_hard = stats(w, s, syl, ch, hard + 1 + rng() % 5);

    const double dasw = asw(more_syl) - asw(base), dasl = asl(more_sent) - asl(base);
    expect(slope(flesch_reading_ease(more_syl), flesch_reading_ease(base), asw(more_syl), asw(base)), -84.6,
           "dFRE/dASW");
    expect(slope(flesch_reading_ease(more_sent), flesch_reading_ease(base), asl(more_sent), asl(base)), -1.015,
           "dFRE/dASL");
    expect(flesch_reading_ease(base) + 1.015 * asl(base) + 84.6 * asw(base), 206.835, "FRE intercept");
    expect(slope(flesch_kincaid_grade(more_sent), flesch_kincaid_grade(base), asl(more_sent), asl(base)), 0.39,
           "dFKGL/dASL");
    expect(slope(flesch_kincaid_grade(more_syl), flesch_kincaid_grade(base), asw(more_syl), asw(base)), 11.8,
           "dFKGL/dASW");
    expect(flesch_kincaid_grade(base) - 0.39 * asl(base) - 11.8 * asw(base), -15.59, "FKGL intercept");
    expect(slope(gunning_fog(more_sent), gunning_fog(base), asl(more_sent), asl(base)), 0.4, "dGFI/dASL");
    const double phw0 = 100.0 * static_cast<double>(hard) / static_cast<double>(w);
    const double phw1 = 100.0 * static_cast<double>(more_hard.hard_words) / static_cast<double>(w);
    expect(slope(gunning_fog(more_hard), gunning_fog(base), phw1, phw0), 0.4, "dGFI/d(100*hard/words)");
    const double cpw0 = static_cast<double>(ch) / static_cast<double>(w);
    const double cpw1 = static_cast<double>(more_ch.characters) / static_cast<double>(w);
    expect(slope(automated_readability_index(more_ch), automated_readability_index(base), cpw1, cpw0), 4.71,
           "dARI/d(chars/words)");
    expect(slope(automated_readability_index(more_sent), automated_readability_index(base), asl(more_sent),
                 asl(base)),
           0.5, "dARI/dASL");
    expect(automated_readability_index(base) - 4.71 * cpw0 - 0.5 * asl(base), -21.43, "ARI intercept");
    check(dasw != 0 && dasl != 0, "perturbations must move the inputs");
  }
  return check.done("50 stat vectors, 11 partials and intercepts within 1e-9");
}

struct SyntheticWorld {
  std::vector<std::string> easy, hard, targets;
  Lexicon lex;
};

SyntheticWorld synthetic_world(std::mt19937_64& rng, double threshold) {
  SyntheticWorld w;
  std::set<std::string> used;
  w.easy = pseudo_words(80, rng, used);
  w.hard = pseudo_words(25, rng, used);
  w.targets = pseudo_words(60, rng, used);
  std::vector<LexiconEntry> entries;
  const auto add = [&](const std::string& s, double aoa) {
    LexiconEntry e;
    e.surface = s;
    e.aoa = aoa;
    entries.push_back(e);
  };
  for (const auto& s : w.easy) add(s, uniform(rng, 2.0, threshold));
  for (const auto& s : w.hard) add(s, uniform(rng, threshold + 0.01, 12.0));
  for (const auto& s : w.targets) add(s, uniform(rng, threshold, 9.0));
  add("zeppa", threshold + 1e-6);
  add("zeppo", threshold);
  w.lex = Lexicon::from_entries(entries);
  return w;
}

std::string render_story(const std::vector<std::vector<std::string>>& sentences) {
  std::string text;
  for (const auto& s : sentences) {
    if (s.empty()) continue;
    std::string sent = util::join(s, " ");
    sent[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sent[0])));
    if (!text.empty()) text += " ";
    text += sent + ".";
  }
  return text;
}

Outcome audit_properties() {
  Check check;
  std::mt19937_64 rng(2024);
  const double threshold = 6.0;
  const auto w = synthetic_world(rng, threshold);
  std::size_t flips_a = 0, flips_b = 0, spans = 0;
  for (int n = 0; n < 200; ++n) {
    std::vector<std::string> targets;
    std::sample(w.targets.begin(), w.targets.end(), std::back_inserter(targets), 5, rng);
    std::shuffle(targets.begin(), targets.end(), rng);
    const bool with_hard = n % 2 == 1;
    std::vector<std::vector<std::string>> sentences(3 + rng() % 6);
    for (auto& s : sentences) {
      const std::size_t len = 3 + rng() % 8;
      for (std::size_t i = 0; i < len; ++i) {
        if (with_hard && rng() % 6 == 0)
          s.push_back(w.hard[rng() % w.hard.size()]);
        else
          s.push_back(w.easy[rng() % w.easy.size()]);
      }
    }
    for (const auto& t : targets) {
      auto& s = sentences[rng() % sentences.size()];
      s.insert(s.begin() + static_cast<std::ptrdiff_t>(rng() % (s.size() + 1)), t);
    }
    StoryRecord story{"syn" + std::to_string(n), "m", "preschool", targets, render_story(sentences), json::object()};
    const auto r = audit_story(story, w.lex);
    check(r.valid, story.id + " should be valid");
    check(r.avg_aoa <= r.max_aoa, story.id + ": avg_aoa > max_aoa");

    // (a) dropping any one target
    for (const auto& t : targets) {
      auto cut = sentences;
      for (auto& s : cut) s.erase(std::remove(s.begin(), s.end(), t), s.end());
      StoryRecord missing = story;
      missing.text = render_story(cut);
      const auto m = audit_story(missing, w.lex);
      flips_a += !m.valid;
      check(!m.valid, story.id + ": removing " + t + " kept the story valid");
      check(m.avg_aoa <= m.max_aoa, story.id + ": avg_aoa > max_aoa after deletion");
    }

    // (b) one word just past the threshold
    if (r.appropriate) {
      for (const char* word : {"zeppa", "zeppo"}) {
        auto more = sentences;
        auto& s = more[rng() % more.size()];
        s.insert(s.begin() + static_cast<std::ptrdiff_t>(rng() % (s.size() + 1)), word);
        StoryRecord bumped = story;
        bumped.text = render_story(more);
        const auto b = audit_story(bumped, w.lex);
        check(b.avg_aoa <= b.max_aoa, story.id + ": avg_aoa > max_aoa after insertion");
        if (std::string(word) == "zeppa") {
          flips_b += !b.appropriate;
          check(!b.appropriate, story.id + ": AoA threshold+eps word left the story appropriate");
        } else {
          check(b.appropriate, story.id + ": AoA == threshold word flagged under the strict rule");
        }
      }
    } else {
      check(with_hard, story.id + " is inappropriate without any hard word");
    }

    // (d) identify_complex agrees with the audit flags
    const auto doc = tokenize(story.text);
    const auto cx = identify_complex(doc, w.lex, targets);
    check(cx.size() == r.inappropriate.size(), story.id + ": identify_complex count differs from audit");
    for (std::size_t i = 0; i < cx.size() && i < r.inappropriate.size(); ++i) {
      const auto& f = r.inappropriate[i];
      check(util::to_lower(cx[i].word) == f.word && cx[i].sentence_idx == f.sentence_idx &&
                cx[i].doc_span == f.span && cx[i].aoa == f.aoa,
            story.id + ": identify_complex span " + std::to_string(i) + " differs from audit");
    }
    spans += cx.size();
  }
  check(flips_b > 0 && spans > 0, "synthetic corpus exercised no appropriateness flips");
  return check.done("200 stories, " + std::to_string(flips_a) + " target deletions, " + std::to_string(flips_b) +
                    " threshold insertions, " + std::to_string(spans) + " complex spans agree");
}

Outcome metric_monotonicity() {
  Check check;
  std::mt19937_64 rng(99);
  std::set<std::string> used;
  const auto complex_words = pseudo_words(50, rng, used);
  const auto simple = pseudo_words(40, rng, used);
  std::vector<LexiconEntry> entries;
  for (const auto& c : complex_words) entries.push_back({c, uniform(rng, 8.0, 12.0), {}, {}, {}});
  for (const auto& s : simple) entries.push_back({s, uniform(rng, 2.0, 7.9), {}, {}, {}});
  const auto lex = Lexicon::from_entries(entries);

  std::vector<SimplificationInstance> gold;
  for (std::size_t i = 0; i < 50; ++i) {
    SimplificationInstance inst;
    inst.id = "g" + std::to_string(i);
    inst.complex_word = complex_words[i];
    inst.sentence = "The " + complex_words[i] + " was here.";
    std::sample(simple.begin(), simple.end(), std::back_inserter(inst.gold), 1 + rng() % 3, rng);
    gold.push_back(inst);
  }
  for (int set = 0; set < 500; ++set) {
    Predictions p;
    for (const auto& inst : gold) {
      if (rng() % 10 == 0) continue;
      std::vector<std::string> pred;
      std::sample(simple.begin(), simple.end(), std::back_inserter(pred), rng() % 5, rng);
      if (rng() % 2) pred.insert(pred.begin() + static_cast<std::ptrdiff_t>(rng() % (pred.size() + 1)), inst.gold[0]);
      p[inst.id] = pred;
    }
    const auto r = score(gold, p, lex);
    check(r.accuracy <= r.acc_at_2 && r.acc_at_2 <= r.acc_at_3,
          "prediction set " + std::to_string(set) + ": acc@1 <= acc@2 <= acc@3 violated");
  }
  const auto g = score(gold, gold_as_predictions(gold), lex);
  check(g.accuracy == 1.0 && g.validity == 1.0, "gold-as-predictions must score accuracy = validity = 1.0");
  return check.done("500 prediction sets over 50 instances; gold-as-preds accuracy " + util::fixed(g.accuracy, 3) +
                    " validity " + util::fixed(g.validity, 3));
}

Outcome report_arithmetic() {
  Check check;
  std::vector<InstanceScore> per;
  for (std::size_t i = 0; i < 95; ++i) {
    InstanceScore s;
    s.id = std::to_string(i);
    s.predicted = true;
    const bool hit = i < 45;
    s.hit = {hit, hit || i % 3 == 0, hit || i % 2 == 0};
    s.valid = i < 89;
    per.push_back(s);
  }
  const auto r = summarize_scores(per, "test");
  const std::vector<NamedResult> results = {{"finetuned", r}};
  const auto csv = render_report(results, "csv");
  const auto row = util::split(util::split(csv, '\n').at(1), ',');
  check(row.size() >= 3 && row[1] == "0.474" && row[2] == "0.937",
        "rendered accuracy/validity cells: " + csv);
  const auto table = render_report(results, "table");
  check(table.find("0.474") != std::string::npos && table.find("0.937") != std::string::npos,
        "text table lacks 0.474 / 0.937");

  std::vector<SimplificationInstance> rows;
  for (std::size_t i = 0; i < 315; ++i) {
    SimplificationInstance inst;
    inst.id = std::to_string(i + 1);
    inst.sentence = "The enormous dog barked.";
    inst.complex_word = "enormous";
    inst.gold = {"big"};
    rows.push_back(inst);
  }
  std::mt19937_64 seeds(5);
  std::size_t tried = 0;
  for (int i = 0; i < 300; ++i) {
    const std::uint64_t seed = i < 100 ? static_cast<std::uint64_t>(i) : seeds();
    const auto parts = split(rows, 0.7, seed);
    std::set<std::string> ids;
    for (const auto& x : parts.train) ids.insert(x.id);
    for (const auto& x : parts.test) ids.insert(x.id);
    check(parts.train.size() == 220 && parts.test.size() == 95,
          "seed " + std::to_string(seed) + " split into " + std::to_string(parts.train.size()) + "/" +
              std::to_string(parts.test.size()));
    check(ids.size() == 315, "seed " + std::to_string(seed) + ": split sides overlap or drop rows");
    ++tried;
  }
  return check.done("45/89 of 95 renders " + row.at(1) + " / " + row.at(2) + "; 315 rows split 220/95 for " +
                    std::to_string(tried) + " seeds");
}

Outcome prompt_fidelity() {
  Check check;
  const std::vector<std::string> words = {"w1", "w2", "w3", "w4", "w5"};
  const std::vector<std::pair<std::string, std::string>> stories = {
      {"preschool", "Write a story for a preschooler containing the following words: w1, w2, w3, w4, w5"},
      {"3yo", "Write a story for a 3-year-old containing the following words: w1, w2, w3, w4, w5"},
      {"4yo", "Write a story for a 4-year-old containing the following words: w1, w2, w3, w4, w5"},
      {"5yo", "Write a story for a 5-year-old containing the following words: w1, w2, w3, w4, w5"},
      {"child", "Write a children's story containing the following words: w1, w2, w3, w4, w5"},
  };
  check(prompt_templates().size() == 5, "expected exactly 5 story templates");
  for (const auto& [id, want] : stories) {
    const auto got = render_prompt(prompt_template(id), words);
    check(got == want, id + " renders \"" + got + "\"");
  }
  const std::string word = "enormous", sentence = "The enormous dog barked at the mailman.";
  const std::vector<std::string> synonyms = {
      "Name a simpler synonym that could replace the word enormous in the following sentence: "
      "The enormous dog barked at the mailman.",
      "Name two simpler synonyms that could replace the word enormous in the following sentence: "
      "The enormous dog barked at the mailman.",
      "Name three simpler synonyms that could replace the word enormous in the following sentence: "
      "The enormous dog barked at the mailman.",
  };
  for (std::size_t k = 1; k <= 3; ++k) {
    const auto got = render_synonym_prompt(word, sentence, k);
    check(got == synonyms[k - 1], "k=" + std::to_string(k) + " renders \"" + got + "\"");
  }

  // what the LLM backend actually sends
  struct Recorder : TextBackend {
    std::vector<std::string> prompts;
    std::string name() const override { return "rec"; }
    std::string complete(const std::string& p, std::size_t) override {
      prompts.push_back(p);
      return "big";
    }
  } rec;
  LlmCandidateBackend llm(rec);
  const auto span = locate_word(sentence, word, 9.0);
  for (std::size_t k = 1; k <= 3; ++k) llm.generate(*span, k);
  check(rec.prompts == synonyms, "LLM candidate backend sends different prompt bytes");
  return check.done("5 story templates and k=1..3 synonym prompts byte-equal");
}

Outcome postfilter_validity() {
  Check check;
  std::mt19937_64 rng(1000);
  std::set<std::string> used;
  const auto pool = pseudo_words(300, rng, used);
  std::vector<LexiconEntry> entries;
  std::map<std::string, double> aoa;
  for (const auto& w : pool) {
    aoa[w] = uniform(rng, 2.0, 12.0);
    entries.push_back({w, aoa[w], {}, {}, {}});
  }
  const auto lex = Lexicon::from_entries(entries);
  std::size_t survivors = 0, removed = 0, oov_runs = 0;
  for (int f = 0; f < 1000; ++f) {
    const auto& original = pool[rng() % pool.size()];
    ComplexSpan span;
    span.sentence = "The " + original + " was there.";
    span.word = original;
    span.span = {4, 4 + original.size()};
    span.doc_span = span.span;
    span.aoa = aoa[original];
    std::vector<std::string> words;
    std::sample(pool.begin(), pool.end(), std::back_inserter(words), 1 + rng() % 12, rng);
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < words.size(); ++i)
      if (words[i] != original) cands.push_back({words[i], 1.0 / static_cast<double>(i + 1), "fx", std::nullopt});
    if (cands.empty()) continue;
    WordTable antonyms;
    if (rng() % 3 == 0) antonyms[original].push_back(cands[rng() % cands.size()].word);
    const bool with_oov = f % 4 == 0;
    if (with_oov) cands.push_back({"qwxyzzy", 0.99, "fx", std::nullopt});

    const auto out = postfilter(cands, span, lex, antonyms);
    std::set<std::string> input;
    for (const auto& c : cands) input.insert(c.word);
    bool seen_unknown = false;
    for (const auto& c : out.candidates) {
      check(input.count(c.word) == 1, "fixture " + std::to_string(f) + ": survivor not in the input");
      if (!c.aoa) {
        seen_unknown = true;
        continue;
      }
      check(!seen_unknown, "fixture " + std::to_string(f) + ": AoA-known candidate ranked below an unknown one");
      check(*c.aoa < span.aoa, "fixture " + std::to_string(f) + ": survivor " + c.word + " has AoA " +
                                   util::shortest(*c.aoa) + " >= " + util::shortest(span.aoa));
      ++survivors;
    }
    oov_runs += seen_unknown;
    removed += out.trace.size();
    check(out.candidates.size() + out.trace.size() == cands.size(),
          "fixture " + std::to_string(f) + ": every removal must be traced");

    auto shuffled = cands;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::set<std::string> a, b;
    for (const auto& c : out.candidates) a.insert(c.word);
    for (const auto& c : postfilter(shuffled, span, lex, antonyms).candidates) b.insert(c.word);
    check(a == b, "fixture " + std::to_string(f) + ": membership depends on input order");
  }
  return check.done("1000 fixtures, " + std::to_string(survivors) + " lexicon-covered survivors all simpler, " +
                    std::to_string(removed) + " removals traced");
}

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "kidlex");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  std::istringstream in;
  const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err, in);
  return {code, out.str(), err.str()};
}

std::map<std::string, std::string> tree_contents(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = util::read_file(e.path().string());
  return files;
}

Outcome offline_end_to_end() {
  Check check;
  const std::vector<std::string> lex = {"--lexicon", fixture("lexicon.csv"), "--word-col", "Word", "--aoa-col",
                                        "AoA_Kup"};
  const auto with = [](std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  std::vector<std::map<std::string, std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    const auto dir = fs::temp_directory_path() / ("kidlex_e2e_" + std::to_string(run));
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto p = [&](const std::string& name) { return (dir / name).string(); };
    const auto step = [&](const std::string& name, const std::vector<std::string>& args) {
      const auto r = cli_run(args);
      check(r.code == 0, name + " exited " + std::to_string(r.code) + ": " + r.err);
      util::write_file(p(name + ".stdout"), r.out);
    };
    for (const std::string model : {"alpha", "beta"})
      step("generate_" + model,
           {"-q", "--jobs", run == 0 ? "2" : "6", "generate", "--backend", fixture("backend_mock.json"), "--prompt",
            "all", "--targets-file", fixture("sets_" + model + ".txt"), "--n", "3", "--model-label", model, "--out",
            p(model + ".jsonl")});
    util::write_file(p("all.jsonl"), util::read_file(p("alpha.jsonl")) + util::read_file(p("beta.jsonl")));
    check(parse_corpus(util::read_file(p("all.jsonl"))).size() == 30, "generate must replay all 30 stories");
    step("audit", with({"-q", "audit", p("all.jsonl"), "--per-story", p("per_story.jsonl")}, lex));
    step("audit_jsonl", with({"-q", "--format", "jsonl", "audit", p("all.jsonl")}, lex));
    step("report", with({"-q", "report", p("alpha.jsonl"), p("beta.jsonl"), "--plots", p("plots")}, lex));
    step("simplify", with({"-q", "--format", "jsonl", "simplify", p("all.jsonl"), "--backends",
                           fixture("candidates.json"), "--trace"},
                          lex));
    step("eval", with({"-q", "eval", "--dataset", fixture("gold.cds.tsv"), "--gold-as-preds", "--pipeline",
                       fixture("candidates.json"), "--write-preds", p("preds.tsv"), "--per-instance",
                       p("per_instance.jsonl")},
                      lex));
    step("eval_test", with({"-q", "eval", "--dataset", fixture("gold.cds.tsv"), "--preds",
                            "pipeline=" + p("preds.tsv"), "--side", "test"},
                           lex));
    runs.push_back(tree_contents(dir));
  }
  check(runs[0].size() == runs[1].size(), "runs produced different file sets");
  std::size_t bytes = 0;
  for (const auto& [name, content] : runs[0]) {
    const auto it = runs[1].find(name);
    check(it != runs[1].end() && it->second == content, name + " differs between runs");
    bytes += content.size();
  }
  const auto& evals = runs[0]["eval.stdout"];
  check(evals.find("pipeline") != std::string::npos, "eval output lacks the pipeline row");
  return check.done(std::to_string(runs[0].size()) + " files, " + std::to_string(bytes) +
                    " bytes, byte-identical across runs");
}

Outcome annotation_state_machine() {
  Check check;
  const auto lex = Lexicon::from_entries({{"the", 2.0, {}, {}, {}}, {"enormous", 9.0, {}, {}, {}},
                                          {"big", 3.0, {}, {}, {}}, {"huge", 5.0, {}, {}, {}},
                                          {"colossal", 10.5, {}, {}, {}}, {"dog", 2.5, {}, {}, {}},
                                          {"barked", 4.0, {}, {}, {}}});
  const auto instance = [](const std::string& story, std::size_t offset) {
    ComplexSpan s;
    s.sentence = "The enormous dog barked.";
    s.word = "enormous";
    s.span = {4, 12};
    s.doc_span = {offset, offset + 8};
    s.aoa = 9.0;
    return TaskInstance{story, s};
  };

  struct Ev {
    int kind;  // 0 propose valid, 1 propose invalid, 2 accept, 3 reject, 4 withdraw
    std::string user;
  };
  const std::vector<Ev> alphabet = {{0, "a"}, {0, "b"}, {1, "a"}, {2, "a"}, {2, "b"}, {2, "c"},
                                    {3, "b"}, {3, "c"}, {4, "a"}, {4, "b"}};
  std::size_t sequences = 0, reached_accepted = 0, absorbed = 0;
  std::vector<std::size_t> idx;
  std::function<void(std::size_t)> rec = [&](std::size_t depth) {
    AnnotationStore store(lex);
    const auto id = store.enqueue({instance("s", 4)}, 1)[0];
    bool was_terminal = false;
    for (auto i : idx) {
      const auto before = store.get(id);
      const auto& e = alphabet[i];
      bool threw = false;
      try {
        if (e.kind == 0) store.propose(id, e.user, "big");
        if (e.kind == 1) store.propose(id, e.user, "colossal");
        if (e.kind == 2) store.review(id, e.user, true, "");
        if (e.kind == 3) store.review(id, e.user, false, "");
        if (e.kind == 4) store.withdraw(id, e.user);
      } catch (const Error&) {
        threw = true;
      }
      const auto after = store.get(id);
      if (was_terminal) {
        ++absorbed;
        check(threw && after.status == before.status && after.version == before.version,
              "terminal state accepted an event");
      }
      if (threw) check(after.version == before.version, "a refused event changed the task");
      was_terminal = terminal(after.status);
      if (after.status == TaskStatus::accepted) {
        std::set<std::string> accepters;
        for (const auto& r : after.reviews)
          if (r.accept && after.proposal && r.reviewer != after.proposal->annotator) accepters.insert(r.reviewer);
        check(after.proposal && after.proposal->auto_validity, "accepted without a valid proposal");
        check(accepters.size() == 2 && after.reviews.size() == 2, "accepted without 2 distinct non-author accepts");
      }
    }
    ++sequences;
    reached_accepted += store.get(id).status == TaskStatus::accepted;
    if (depth == 5) return;
    for (std::size_t i = 0; i < alphabet.size(); ++i) {
      idx.push_back(i);
      rec(depth + 1);
      idx.pop_back();
    }
  };
  rec(0);
  check(sequences == 111111, "expected 111111 sequences, ran " + std::to_string(sequences));
  check(reached_accepted > 0 && absorbed > 0, "exhaustive walk never reached a terminal state");

  // export -> load round trip and validity of the exported gold
  AnnotationStore store(lex);
  std::vector<TaskInstance> items;
  for (std::size_t i = 0; i < 40; ++i) items.push_back(instance("story" + std::to_string(i % 9), 4 + 50 * i));
  const auto ids = store.enqueue(items, 11);
  std::size_t accepted = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const char* syn = i % 5 == 4 ? "colossal" : (i % 2 ? "huge" : "big");
    store.propose(ids[i], "ann", syn);
    if (store.get(ids[i]).status != TaskStatus::proposed) continue;
    store.review(ids[i], "rev1", true, "");
    store.review(ids[i], "rev2", i % 7 != 3, "");
    accepted += store.get(ids[i]).status == TaskStatus::accepted;
  }
  const auto exported = store.export_cds();
  const auto loaded = parse_dataset(exported, DatasetFormat::cds, "export");
  check(loaded == store.export_instances(), "export -> load round trip lost information");
  check(dataset_to_cds(loaded) == exported, "re-rendering the loaded export changed bytes");
  check(loaded.size() == accepted, "export size differs from accepted count");
  const auto r = score(loaded, gold_as_predictions(loaded), lex);
  check(r.validity == 1.0, "exported gold validity " + util::shortest(r.validity));
  return check.done(std::to_string(sequences) + " sequences to depth 5; " + std::to_string(loaded.size()) +
                    " exported instances round-trip, validity " + util::fixed(r.validity, 3));
}

}  // namespace

int main() {
  struct Criterion {
    std::string name;
    double budget_s;  // 0: no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"readability-oracle", 1.0, readability_oracle},
      {"formula-constants", 0, formula_constants},
      {"audit-properties", 10.0, audit_properties},
      {"metric-monotonicity", 0, metric_monotonicity},
      {"report-arithmetic", 0, report_arithmetic},
      {"prompt-fidelity", 0, prompt_fidelity},
      {"postfilter-validity", 0, postfilter_validity},
      {"offline-end-to-end", 30.0, offline_end_to_end},
      {"annotation-state-machine", 0, annotation_state_machine},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.ok && c.budget_s > 0 && secs >= c.budget_s)
      o = {false, "took " + util::fixed(secs, 2) + " s, budget " + util::fixed(c.budget_s, 0) + " s"};
    failed += !o.ok;
    std::cout << (o.ok ? "PASS " : "FAIL ") << c.name << " (" << util::fixed(secs, 3) << " s): " << o.detail
              << std::endl;
  }
  std::cout << (failed ? "FAIL" : "PASS") << " acceptance: " << criteria.size() - static_cast<std::size_t>(failed)
            << "/" << criteria.size() << " criteria" << std::endl;
  return failed ? 1 : 0;
}
