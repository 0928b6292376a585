#ifndef KIDLEX_AUDIT_HPP
#define KIDLEX_AUDIT_HPP

// Story- and corpus-level simplicity audits.
//
// Defaults: a word is too hard when its AoA is strictly greater than 6; averages
// run over word tokens found in the lexicon (misses are excluded and reported);
// assigned target words count toward the highest AoA but never make a story
// inappropriate; a target is present when a token equals it or strips to it
// through the lemma rules ("juggled" satisfies "juggle").

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "kidlex/charts.hpp"
#include "kidlex/lexicon.hpp"
#include "kidlex/readability.hpp"
#include "kidlex/textproc.hpp"

namespace kidlex {

using json = nlohmann::json;

struct StoryRecord {
  std::string id;
  std::string model;
  std::string prompt_id;
  std::vector<std::string> target_words;  // five for generated stories, none for reference corpora
  std::string text;
  json meta = json::object();
  friend bool operator==(const StoryRecord&, const StoryRecord&) = default;
};

inline void to_json(json& j, const StoryRecord& s) {
  j = json{{"id", s.id},          {"model", s.model},         {"prompt_id", s.prompt_id},
           {"target_words", s.target_words}, {"text", s.text}, {"meta", s.meta}};
}

inline void from_json(const json& j, StoryRecord& s) {
  s.id = j.at("id").get<std::string>();
  s.model = j.value("model", "");
  s.prompt_id = j.value("prompt_id", "");
  s.target_words = j.value("target_words", std::vector<std::string>{});
  s.text = j.at("text").get<std::string>();
  s.meta = j.value("meta", json::object());
}

inline void validate_story(const StoryRecord& s) {
  if (s.id.empty()) throw Error("corpus.bad_record", "story record needs an id");
  if (!s.target_words.empty() && s.target_words.size() != 5)
    throw Error("corpus.bad_record",
                "story " + s.id + ": expected 5 target words, got " + std::to_string(s.target_words.size()));
}

inline std::string story_to_line(const StoryRecord& s) { return json(s).dump(); }

inline std::vector<StoryRecord> parse_corpus(std::string_view content, const std::string& origin = "corpus") {
  std::vector<StoryRecord> out;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    const auto line = util::trim_view(content.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty()) {
      if (end == content.size()) break;
      continue;
    }
    StoryRecord rec;
    try {
      rec = json::parse(line).get<StoryRecord>();
    } catch (const json::exception& e) {
      throw Error("corpus.bad_record", origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
    validate_story(rec);
    if (!ids.insert(rec.id).second)
      throw Error("corpus.duplicate_id", origin + ":" + std::to_string(line_no) + ": duplicate id " + rec.id);
    out.push_back(std::move(rec));
    if (end == content.size()) break;
  }
  return out;
}

inline std::vector<StoryRecord> load_corpus(const std::string& path) {
  return parse_corpus(util::read_file(path), path);
}

inline std::string corpus_to_string(const std::vector<StoryRecord>& stories) {
  std::string out;
  for (const auto& s : stories) out += story_to_line(s) + "\n";
  return out;
}

enum class ThresholdOp { greater, greater_equal };

inline std::string_view to_string(ThresholdOp op) { return op == ThresholdOp::greater ? ">" : ">="; }

inline bool exceeds(double aoa, double threshold, ThresholdOp op) {
  return op == ThresholdOp::greater ? aoa > threshold : aoa >= threshold;
}

struct AuditOptions {
  double threshold = 6.0;
  ThresholdOp op = ThresholdOp::greater;
  bool types_mode = false;
  bool target_exemption = true;
  bool lemma_target_match = true;
};

// Token-vs-target test shared by validity, exemption and complex-word detection.
inline bool matches_target(std::string_view token_lower, std::string_view target, bool lemma_level) {
  if (token_lower == target) return true;
  if (!lemma_level) return false;
  for (const auto& c : morph::lemma_candidates(token_lower))
    if (c == target) return true;
  return false;
}

inline bool matches_any_target(std::string_view token_lower, const std::vector<std::string>& targets,
                               bool lemma_level) {
  return std::any_of(targets.begin(), targets.end(),
                     [&](const std::string& t) { return matches_target(token_lower, t, lemma_level); });
}

inline std::vector<std::string> normalized_targets(const std::vector<std::string>& targets) {
  std::vector<std::string> out;
  for (const auto& t : targets) out.push_back(normalize_surface(t));
  return out;
}

struct FlaggedToken {
  std::string word;  // lower-cased surface
  double aoa = 0;
  std::size_t sentence_idx = 0;
  Span span;
  friend bool operator==(const FlaggedToken&, const FlaggedToken&) = default;
};

struct AuditReport {
  std::string story_id;
  double avg_aoa = 0;
  std::string max_word;
  double max_aoa = 0;
  double coverage = 0;
  bool valid = false;
  bool appropriate = false;
  std::vector<std::string> oov;              // unfound word types, sorted
  std::vector<std::string> missing_targets;
  std::vector<FlaggedToken> inappropriate;   // first occurrence per (sentence, word)
  std::size_t word_tokens = 0;
  std::size_t found_tokens = 0;
  std::size_t lemma_rung_hits = 0;
  AuditOptions options;
  ReadabilityReport readability;
};

inline AuditReport audit_document(const Document& doc, const std::vector<std::string>& raw_targets,
                                  const Lexicon& lex, const AuditOptions& opts = {}) {
  if (util::trim_view(doc.text).empty()) throw Error("audit.empty_text", "story text is empty");
  const auto targets = normalized_targets(raw_targets);

  AuditReport r;
  r.options = opts;
  std::set<std::string> oov;
  std::set<std::pair<std::size_t, std::string>> flagged_keys;
  std::map<std::string, double> type_aoa;
  double sum = 0;
  bool have_max = false;

  for (const auto& t : doc.tokens) {
    if (!t.is_word()) continue;
    ++r.word_tokens;
    const auto hit = lex.lookup(t.lower);
    if (!hit) {
      oov.insert(t.lower);
      continue;
    }
    ++r.found_tokens;
    if (hit->via == MatchRung::lemma) ++r.lemma_rung_hits;
    sum += hit->aoa;
    type_aoa.emplace(t.lower, hit->aoa);
    if (!have_max || hit->aoa > r.max_aoa) {
      r.max_aoa = hit->aoa;
      r.max_word = t.lower;
      have_max = true;
    }
    if (!exceeds(hit->aoa, opts.threshold, opts.op)) continue;
    if (opts.target_exemption && matches_any_target(t.lower, targets, opts.lemma_target_match)) continue;
    if (flagged_keys.emplace(t.sentence_idx, t.lower).second)
      r.inappropriate.push_back({t.lower, hit->aoa, t.sentence_idx, t.span});
  }
  if (r.word_tokens == 0 || r.found_tokens == 0)
    throw Error("audit.zero_coverage", "no word of the story is in the lexicon");

  r.coverage = static_cast<double>(r.found_tokens) / static_cast<double>(r.word_tokens);
  if (opts.types_mode) {
    double type_sum = 0;
    for (const auto& [_, a] : type_aoa) type_sum += a;
    r.avg_aoa = type_sum / static_cast<double>(type_aoa.size());
  } else {
    r.avg_aoa = sum / static_cast<double>(r.found_tokens);
  }
  r.appropriate = r.inappropriate.empty();
  for (const auto& target : targets) {
    const bool present = std::any_of(doc.tokens.begin(), doc.tokens.end(), [&](const Token& t) {
      return t.is_word() && matches_target(t.lower, target, opts.lemma_target_match);
    });
    if (!present) r.missing_targets.push_back(target);
  }
  r.valid = r.missing_targets.empty();
  r.oov.assign(oov.begin(), oov.end());
  r.readability = readability(doc);
  return r;
}

inline AuditReport audit_story(const StoryRecord& story, const Lexicon& lex, const AuditOptions& opts = {}) {
  if (util::trim_view(story.text).empty())
    throw Error("audit.empty_text", "story " + story.id + " has empty text");
  auto r = audit_document(tokenize(story.text), story.target_words, lex, opts);
  r.story_id = story.id;
  return r;
}

inline json audit_to_json(const AuditReport& r) {
  json flagged = json::array();
  for (const auto& f : r.inappropriate)
    flagged.push_back({{"word", f.word}, {"aoa", f.aoa}, {"sentence", f.sentence_idx}});
  return json{{"id", r.story_id},
              {"avg_aoa", r.avg_aoa},
              {"max_aoa", {{"word", r.max_word}, {"aoa", r.max_aoa}}},
              {"coverage", r.coverage},
              {"valid", r.valid},
              {"appropriate", r.appropriate},
              {"missing_targets", r.missing_targets},
              {"inappropriate", flagged},
              {"oov", r.oov},
              {"threshold", r.options.threshold},
              {"operator", to_string(r.options.op)},
              {"lemma_rung_hits", r.lemma_rung_hits},
              {"fre", r.readability.fre},
              {"fkgl", r.readability.fkgl},
              {"gfi", r.readability.gfi},
              {"ari", r.readability.ari}};
}

// ---------------------------------------------------------------------------
// Corpus summaries

enum class Metric { avg_aoa, max_aoa, pct_valid, pct_appropriate, fre, fkgl, gfi, ari };

inline const std::vector<Metric>& all_metrics() {
  static const std::vector<Metric> m = {Metric::avg_aoa,         Metric::max_aoa, Metric::pct_valid,
                                        Metric::pct_appropriate, Metric::fre,     Metric::fkgl,
                                        Metric::gfi,             Metric::ari};
  return m;
}

struct MetricInfo {
  std::string_view key;
  std::string_view label;
  bool higher_is_better;
};

inline MetricInfo info(Metric m) {
  switch (m) {
    case Metric::avg_aoa: return {"avg_aoa", "Average AoA", false};
    case Metric::max_aoa: return {"max_aoa", "Highest AoA", false};
    case Metric::pct_valid: return {"pct_valid", "% Valid", true};
    case Metric::pct_appropriate: return {"pct_appropriate", "% Appropriate", true};
    case Metric::fre: return {"fre", "Flesch Reading Ease", true};
    case Metric::fkgl: return {"fkgl", "Flesch-Kincaid Grade", false};
    case Metric::gfi: return {"gfi", "Gunning-Fog Index", false};
    case Metric::ari: return {"ari", "Automated Readability Index", false};
  }
  return {"?", "?", true};
}

inline Metric metric_from_key(std::string_view key) {
  for (auto m : all_metrics())
    if (info(m).key == key) return m;
  throw Error("audit.unknown_metric", "unknown metric: " + std::string(key));
}

struct CellSummary {
  std::string model;
  std::string prompt_id;
  std::size_t n = 0;
  double avg_aoa = 0;  // mean of per-story average AoA
  double max_aoa = 0;  // mean of per-story highest AoA
  double pct_valid = 0;
  double pct_appropriate = 0;
  double fre = 0, fkgl = 0, gfi = 0, ari = 0;
  double coverage = 0;

  double get(Metric m) const {
    switch (m) {
      case Metric::avg_aoa: return avg_aoa;
      case Metric::max_aoa: return max_aoa;
      case Metric::pct_valid: return pct_valid;
      case Metric::pct_appropriate: return pct_appropriate;
      case Metric::fre: return fre;
      case Metric::fkgl: return fkgl;
      case Metric::gfi: return gfi;
      case Metric::ari: return ari;
    }
    return 0;
  }
};

struct CorpusSummary {
  std::string label;
  std::vector<CellSummary> cells;  // ordered by model, then prompt
  CellSummary overall;
  AuditOptions options;

  // n-weighted means of each model's cells.
  std::vector<CellSummary> by_model() const;
};

namespace detail {

inline int prompt_rank(std::string_view p) {
  static const std::vector<std::string_view> order = {"preschool", "3yo", "4yo", "5yo", "child"};
  for (std::size_t i = 0; i < order.size(); ++i)
    if (order[i] == p) return static_cast<int>(i);
  return static_cast<int>(order.size());
}

struct Accumulator {
  std::size_t n = 0, valid = 0, appropriate = 0;
  double avg = 0, max = 0, fre = 0, fkgl = 0, gfi = 0, ari = 0, cov = 0;
  void add(const AuditReport& r) {
    ++n;
    valid += r.valid ? 1 : 0;
    appropriate += r.appropriate ? 1 : 0;
    avg += r.avg_aoa;
    max += r.max_aoa;
    fre += r.readability.fre;
    fkgl += r.readability.fkgl;
    gfi += r.readability.gfi;
    ari += r.readability.ari;
    cov += r.coverage;
  }
  void add(const CellSummary& c) {
    const double w = static_cast<double>(c.n);
    n += c.n;
    valid += static_cast<std::size_t>(std::llround(c.pct_valid * w / 100.0));
    appropriate += static_cast<std::size_t>(std::llround(c.pct_appropriate * w / 100.0));
    avg += c.avg_aoa * w;
    max += c.max_aoa * w;
    fre += c.fre * w;
    fkgl += c.fkgl * w;
    gfi += c.gfi * w;
    ari += c.ari * w;
    cov += c.coverage * w;
  }
  CellSummary finish(std::string model, std::string prompt) const {
    CellSummary c;
    c.model = std::move(model);
    c.prompt_id = std::move(prompt);
    c.n = n;
    const double d = static_cast<double>(n);
    c.avg_aoa = avg / d;
    c.max_aoa = max / d;
    c.pct_valid = 100.0 * static_cast<double>(valid) / d;
    c.pct_appropriate = 100.0 * static_cast<double>(appropriate) / d;
    c.fre = fre / d;
    c.fkgl = fkgl / d;
    c.gfi = gfi / d;
    c.ari = ari / d;
    c.coverage = cov / d;
    return c;
  }
};

inline bool cell_less(const std::pair<std::string, std::string>& a, const std::pair<std::string, std::string>& b) {
  if (a.first != b.first) return a.first < b.first;
  const int ra = prompt_rank(a.second), rb = prompt_rank(b.second);
  if (ra != rb) return ra < rb;
  return a.second < b.second;
}

}  // namespace detail

inline std::vector<CellSummary> CorpusSummary::by_model() const {
  std::map<std::string, detail::Accumulator> acc;
  for (const auto& c : cells) acc[c.model].add(c);
  std::vector<CellSummary> out;
  for (const auto& [model, a] : acc) out.push_back(a.finish(model, ""));
  return out;
}

/// Audits every story (optionally on `jobs` threads) and aggregates per
/// (model, prompt) cell. Per-story results are returned through `reports` when given.
inline CorpusSummary summarize_corpus(const std::vector<StoryRecord>& stories, const Lexicon& lex,
                                      const AuditOptions& opts = {}, unsigned jobs = 1,
                                      std::vector<AuditReport>* reports = nullptr) {
  if (stories.empty()) throw Error("audit.empty_corpus", "corpus has no stories");
  std::vector<AuditReport> results(stories.size());
  std::vector<std::exception_ptr> errors(stories.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(stories.size())));
  const auto work = [&](unsigned w) {
    for (std::size_t i = w; i < stories.size(); i += workers) {
      try {
        results[i] = audit_story(stories[i], lex, opts);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::map<std::pair<std::string, std::string>, detail::Accumulator, decltype(&detail::cell_less)> cells(
      &detail::cell_less);
  detail::Accumulator overall;
  for (std::size_t i = 0; i < stories.size(); ++i) {
    cells[{stories[i].model, stories[i].prompt_id}].add(results[i]);
    overall.add(results[i]);
  }
  CorpusSummary summary;
  summary.options = opts;
  for (const auto& [key, acc] : cells) summary.cells.push_back(acc.finish(key.first, key.second));
  summary.overall = overall.finish("ALL", "");
  if (reports) *reports = std::move(results);
  return summary;
}

namespace detail {
// "90%", "4.78%": two decimals with trailing zeros dropped.
inline std::string percent(double v) {
  std::string s = util::fixed(v, 2);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s + "%";
}

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}
}  // namespace detail

inline std::string options_footer(const AuditOptions& o) {
  return "threshold: AoA " + std::string(to_string(o.op)) + " " + util::fixed(o.threshold, 2) +
         " is too hard (" + (o.op == ThresholdOp::greater ? "strict" : "non-strict") + ")" +
         "; target exemption: " + (o.target_exemption ? "on" : "off") +
         "; averaging: " + (o.types_mode ? "types" : "tokens") +
         "; target match: " + (o.lemma_target_match ? "lemma" : "exact") +
         "; lookup rungs: exact, then suffix-strip lemma";
}

inline std::vector<std::string> summary_columns() {
  return {"Model", "Prompt", "Average AoA", "Highest AoA", "% Valid", "% Appropriate",
          "FRE",   "FKGL",   "GFI",         "ARI",         "n"};
}

inline std::vector<std::string> summary_row(const CellSummary& c) {
  return {c.model,
          c.prompt_id,
          util::fixed(c.avg_aoa, 2),
          util::fixed(c.max_aoa, 2),
          detail::percent(c.pct_valid),
          detail::percent(c.pct_appropriate),
          util::fixed(c.fre, 2),
          util::fixed(c.fkgl, 2),
          util::fixed(c.gfi, 2),
          util::fixed(c.ari, 2),
          std::to_string(c.n)};
}

inline std::string render_text_table(const std::vector<std::string>& header,
                                     const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) w[i] = header[i].size();
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size() && i < w.size(); ++i) w[i] = std::max(w[i], r[i].size());
  std::string out;
  const auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      out += i ? " | " : "";
      out += i + 1 == r.size() ? r[i] : detail::pad(r[i], w[i]);
    }
    out += "\n";
  };
  line(header);
  for (std::size_t i = 0; i < header.size(); ++i) {
    out += i ? "-+-" : "";
    out += std::string(w[i], '-');
  }
  out += "\n";
  for (const auto& r : rows) line(r);
  return out;
}

inline std::string render_csv(const std::vector<std::string>& header,
                              const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  const auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + util::csv_escape(r[i]);
    out += "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

inline json cell_to_json(const CellSummary& c) {
  return json{{"model", c.model},   {"prompt", c.prompt_id},   {"n", c.n},
              {"avg_aoa", c.avg_aoa}, {"max_aoa", c.max_aoa},   {"pct_valid", c.pct_valid},
              {"pct_appropriate", c.pct_appropriate},           {"fre", c.fre},
              {"fkgl", c.fkgl},     {"gfi", c.gfi},             {"ari", c.ari},
              {"coverage", c.coverage}};
}

/// format: "table", "csv" or "jsonl" (one record per cell, then the overall row).
inline std::string render_summary(const CorpusSummary& s, std::string_view format) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : s.cells) rows.push_back(summary_row(c));
  if (format == "csv") return render_csv(summary_columns(), rows);
  if (format == "jsonl") {
    std::string out;
    for (const auto& c : s.cells) out += cell_to_json(c).dump() + "\n";
    auto overall = cell_to_json(s.overall);
    overall["threshold"] = s.options.threshold;
    overall["operator"] = to_string(s.options.op);
    overall["target_exemption"] = s.options.target_exemption;
    overall["types_mode"] = s.options.types_mode;
    out += overall.dump() + "\n";
    return out;
  }
  if (format != "table") throw Error("cli.bad_format", "unknown format: " + std::string(format));
  rows.push_back(summary_row(s.overall));
  return render_text_table(summary_columns(), rows) + options_footer(s.options) + "\n";
}

// ---------------------------------------------------------------------------
// Corpus comparison

struct ComparisonRow {
  Metric metric;
  double a = 0;
  double b = 0;
  double delta = 0;  // b - a
  bool b_better = false;
};

struct Comparison {
  std::string label_a;
  std::string label_b;
  std::vector<ComparisonRow> rows;
};

inline Comparison compare_corpora(const CorpusSummary& a, const CorpusSummary& b,
                                  const std::vector<Metric>& metrics = all_metrics()) {
  if (a.cells.empty() || b.cells.empty())
    throw Error("audit.empty_summary", "both summaries must be non-empty");
  Comparison c{a.label.empty() ? "A" : a.label, b.label.empty() ? "B" : b.label, {}};
  for (auto m : metrics) {
    ComparisonRow r{m, a.overall.get(m), b.overall.get(m), 0, false};
    r.delta = r.b - r.a;
    r.b_better = info(m).higher_is_better ? r.delta > 0 : r.delta < 0;
    c.rows.push_back(r);
  }
  return c;
}

inline std::string render_comparison(const Comparison& c) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : c.rows) {
    const auto mi = info(r.metric);
    std::string verdict = r.delta == 0 ? "same" : (r.b_better ? c.label_b + " better" : c.label_b + " worse");
    rows.push_back({std::string(mi.label), util::fixed(r.a, 2), util::fixed(r.b, 2), util::fixed(r.delta, 2),
                    mi.higher_is_better ? "higher" : "lower", verdict});
  }
  return render_text_table({"Metric", c.label_a, c.label_b, "Delta", "Better", "Verdict"}, rows);
}

/// One SVG per metric with a bar for each model of `a` followed by each model of `b`.
inline std::vector<std::string> emit_charts(const std::vector<const CorpusSummary*>& summaries,
                                            const std::vector<Metric>& metrics, const std::string& dir) {
  std::vector<std::string> paths;
  for (auto m : metrics) {
    charts::BarChart chart;
    chart.title = std::string(info(m).label);
    chart.higher_is_better = info(m).higher_is_better;
    for (const auto* s : summaries)
      for (const auto& row : s->by_model()) chart.bars.emplace_back(row.model, row.get(m));
    paths.push_back(charts::write_svg(chart, dir, std::string(info(m).key)));
  }
  return paths;
}

}  // namespace kidlex

#endif  // KIDLEX_AUDIT_HPP
