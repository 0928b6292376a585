#ifndef KIDLEX_CLI_HPP
#define KIDLEX_CLI_HPP

// `kidlex` command-line front end. dispatch() is callable in-process so tests
// can drive every subcommand against string streams.

#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kidlex/annotate_server.hpp"
#include "kidlex/audit.hpp"
#include "kidlex/evalharness.hpp"
#include "kidlex/genclient.hpp"
#include "kidlex/lexicon.hpp"
#include "kidlex/readability.hpp"
#include "kidlex/simplify.hpp"
#include "kidlex/targetwords.hpp"
#include "kidlex/textproc.hpp"

namespace kidlex::cli {

struct Io {
  std::ostream& out;
  std::ostream& err;
  std::istream& in;
};

struct Globals {
  std::uint64_t seed = 1;
  unsigned jobs = 4;
  std::string format = "table";
  bool quiet = false;
};

struct LexiconFlags {
  std::string path;
  std::string word_col = "word";
  std::string aoa_col = "aoa";
  std::string concreteness_col;
  std::string pos_col;
  std::string lemma_col;

  void attach(CLI::App* app) {
    app->add_option("--lexicon", path, "AoA lexicon (CSV with header)");
    app->add_option("--word-col", word_col, "Word column name or index")->capture_default_str();
    app->add_option("--aoa-col", aoa_col, "AoA column name or index")->capture_default_str();
    app->add_option("--concreteness-col", concreteness_col, "Concreteness column");
    app->add_option("--pos-col", pos_col, "Part-of-speech column");
    app->add_option("--lemma-col", lemma_col, "Lemma column");
  }

  Lexicon load(bool required = true) const {
    if (path.empty()) {
      if (required) throw Error("cli.missing_lexicon", "--lexicon is required");
      return {};
    }
    ColumnMap cols;
    cols.word = word_col;
    cols.aoa = aoa_col;
    if (!concreteness_col.empty()) cols.concreteness = concreteness_col;
    if (!pos_col.empty()) cols.pos = pos_col;
    if (!lemma_col.empty()) cols.lemma = lemma_col;
    return load_lexicon(path, cols);
  }
};

struct ThresholdFlags {
  double threshold = 6.0;
  bool non_strict = false;

  void attach(CLI::App* app) {
    app->add_option("--threshold", threshold, "AoA above which a word is too hard")->capture_default_str();
    app->add_flag("--ge", non_strict, "Treat AoA equal to the threshold as too hard");
  }
  ThresholdOp op() const { return non_strict ? ThresholdOp::greater_equal : ThresholdOp::greater; }
};

// ---------------------------------------------------------------------------
// Helpers

inline std::string read_input(const std::string& path, std::istream& in) {
  if (path == "-") {
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  return util::read_file(path);
}

inline void emit(Io& io, const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    io.out << text;
  else
    util::write_file(path, text);
}

inline std::string stem_of(const std::string& path) {
  return path == "-" ? "stdin" : std::filesystem::path(path).stem().string();
}

// A story corpus has one JSON object per line; anything else is plain text.
inline bool looks_like_corpus(std::string_view content) {
  const auto first = content.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos || content[first] != '{') return false;
  const auto end = content.find('\n', first);
  try {
    const auto j = json::parse(content.substr(first, end == std::string_view::npos ? end : end - first));
    return j.is_object() && j.contains("text");
  } catch (const json::exception&) {
    return false;
  }
}

inline std::string resolve_relative(const std::string& base_file, const std::string& path) {
  if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base_file).parent_path() / path).string();
}

/// Candidate backends for simplify/eval. Config JSON:
///   {"candidates": [{"type": "thesaurus", "table": "syn.tsv", "name": "thes"},
///                   {"type": "llm", "backend": "gen.json" | {...backend config...}}],
///    "antonyms": "ant.tsv"}
/// Relative paths resolve against the config file's directory.
struct BackendSet {
  std::vector<std::unique_ptr<TextBackend>> text;
  std::vector<std::unique_ptr<CandidateBackend>> owned;
  WordTable antonyms;

  std::vector<CandidateBackend*> pointers() const {
    std::vector<CandidateBackend*> out;
    for (const auto& b : owned) out.push_back(b.get());
    return out;
  }

  void add_thesaurus(const std::string& table_path, std::string name = "") {
    if (name.empty()) name = stem_of(table_path);
    owned.push_back(std::make_unique<ThesaurusBackend>(load_word_table(table_path), name));
  }

  void add_config(const std::string& cfg_path) {
    json cfg;
    try {
      cfg = json::parse(util::read_file(cfg_path));
    } catch (const json::exception& e) {
      throw Error("simplify.bad_config", cfg_path + ": " + e.what());
    }
    if (!cfg.contains("candidates") || !cfg["candidates"].is_array())
      throw Error("simplify.bad_config", cfg_path + ": missing candidates array");
    for (const auto& c : cfg["candidates"]) {
      const auto type = c.value("type", std::string());
      if (type == "thesaurus") {
        add_thesaurus(resolve_relative(cfg_path, c.value("table", std::string())), c.value("name", std::string()));
      } else if (type == "llm") {
        BackendConfig bc;
        const auto& b = c.at("backend");
        if (b.is_string()) {
          const auto p = resolve_relative(cfg_path, b.get<std::string>());
          bc = load_backend_config(p);
          bc.replay = resolve_relative(p, bc.replay);
        } else {
          bc = backend_config_from_json(b);
          bc.replay = resolve_relative(cfg_path, bc.replay);
        }
        text.push_back(make_backend(bc));
        RetryPolicy retry;
        retry.max_retries = bc.max_retries;
        retry.backoff_base_s = bc.backoff_base_s;
        owned.push_back(std::make_unique<LlmCandidateBackend>(*text.back(), retry));
      } else {
        throw Error("simplify.bad_config", cfg_path + ": unknown candidate backend type '" + type + "'");
      }
    }
    if (cfg.contains("antonyms")) merge_antonyms(resolve_relative(cfg_path, cfg["antonyms"].get<std::string>()));
  }

  void merge_antonyms(const std::string& path) {
    for (auto& [k, v] : load_word_table(path)) {
      auto& dst = antonyms[k];
      dst.insert(dst.end(), v.begin(), v.end());
    }
  }
};

// ---------------------------------------------------------------------------
// Subcommands

inline int run_lexicon(Io& io, const Globals& g, const LexiconFlags& lf, const std::vector<std::string>& lookups,
                       const std::string& coverage_file) {
  const auto lex = lf.load();
  const auto& src = lex.source();
  json meta = {{"path", src.path},
               {"rows", src.data_rows},
               {"entries", lex.size()},
               {"malformed_rows", src.malformed_rows},
               {"malformed_lines", src.malformed_lines},
               {"collisions", src.collisions},
               {"collision_policy", src.collision_policy},
               {"has_pos", lex.has_pos()},
               {"has_concreteness", lex.has_concreteness()}};
  std::vector<json> hits;
  for (const auto& w : lookups) {
    json h = {{"word", w}};
    if (const auto r = lex.lookup(w)) {
      h["aoa"] = r->aoa;
      h["via"] = to_string(r->via);
      h["matched"] = r->matched;
    } else {
      h["aoa"] = nullptr;
      h["via"] = "miss";
      h["matched"] = nullptr;
    }
    hits.push_back(std::move(h));
  }
  std::optional<double> cov;
  if (!coverage_file.empty()) cov = coverage(lex, tokenize(read_input(coverage_file, io.in)));

  if (g.format == "jsonl") {
    if (cov) meta["coverage"] = *cov;
    io.out << meta.dump() << "\n";
    for (const auto& h : hits) io.out << h.dump() << "\n";
    return 0;
  }
  std::vector<std::vector<std::string>> rows = {
      {"path", src.path},
      {"rows", std::to_string(src.data_rows)},
      {"entries", std::to_string(lex.size())},
      {"malformed rows", std::to_string(src.malformed_rows)},
      {"collisions", std::to_string(src.collisions) + " (" + src.collision_policy + ")"},
      {"pos column", lex.has_pos() ? "yes" : "no"},
      {"concreteness column", lex.has_concreteness() ? "yes" : "no"}};
  if (cov) rows.push_back({"coverage", util::fixed(*cov * 100.0, 2) + "%"});
  std::vector<std::vector<std::string>> lrows;
  for (const auto& h : hits)
    lrows.push_back({h["word"].get<std::string>(), h["aoa"].is_null() ? "-" : util::fixed(h["aoa"].get<double>(), 2),
                     h["via"].get<std::string>(), h["matched"].is_null() ? "-" : h["matched"].get<std::string>()});
  if (g.format == "csv") {
    io.out << render_csv({"field", "value"}, rows);
    if (!lrows.empty()) io.out << render_csv({"word", "aoa", "via", "matched"}, lrows);
    return 0;
  }
  io.out << render_text_table({"Field", "Value"}, rows);
  if (!lrows.empty()) io.out << "\n" << render_text_table({"Word", "AoA", "Via", "Matched"}, lrows);
  return 0;
}

namespace detail {

struct ReadabilityRow {
  std::string label;
  std::size_t n = 0;
  double fre = 0, fkgl = 0, gfi = 0, ari = 0;
  TextStats stats;

  void add(const ReadabilityReport& r) {
    ++n;
    fre += r.fre;
    fkgl += r.fkgl;
    gfi += r.gfi;
    ari += r.ari;
    stats.words += r.stats.words;
    stats.sentences += r.stats.sentences;
    stats.syllables += r.stats.syllables;
    stats.characters += r.stats.characters;
    stats.hard_words += r.stats.hard_words;
    stats.dictionary_hits += r.stats.dictionary_hits;
    stats.word_tokens += r.stats.word_tokens;
  }
  double mean(double sum) const { return n ? sum / static_cast<double>(n) : 0.0; }
  double hit_rate() const {
    return stats.word_tokens ? static_cast<double>(stats.dictionary_hits) / static_cast<double>(stats.word_tokens) : 0.0;
  }
};

}  // namespace detail

inline int run_readability(Io& io, const Globals& g, const std::string& input, const std::string& syllable_dict,
                           const std::string& plots, bool per_story, const std::string& out_path) {
  std::optional<SyllableCounter> custom;
  if (!syllable_dict.empty()) custom = SyllableCounter::load(syllable_dict);
  const SyllableCounter& counter = custom ? *custom : default_syllable_counter();

  const auto content = read_input(input, io.in);
  std::vector<detail::ReadabilityRow> rows;
  if (looks_like_corpus(content)) {
    const auto stories = parse_corpus(content, input);
    std::map<std::string, std::size_t> index;
    for (const auto& s : stories) {
      const auto r = readability(tokenize(s.text, counter), counter);
      const auto key = per_story ? s.id : s.model;
      auto [it, fresh] = index.try_emplace(key, rows.size());
      if (fresh) rows.push_back({key});
      rows[it->second].add(r);
    }
  } else {
    rows.push_back({stem_of(input)});
    rows.back().add(readability(tokenize(content, counter), counter));
  }

  const std::vector<std::string> header = {"Label", "FRE",        "FKGL",       "GFI",       "ARI",      "Words",
                                           "Sentences", "Syllables", "Characters", "Hard words", "Dict hits", "n"};
  std::string text;
  if (g.format == "jsonl") {
    for (const auto& r : rows)
      text += json{{"label", r.label},
                   {"fre", r.mean(r.fre)},
                   {"fkgl", r.mean(r.fkgl)},
                   {"gfi", r.mean(r.gfi)},
                   {"ari", r.mean(r.ari)},
                   {"words", r.stats.words},
                   {"sentences", r.stats.sentences},
                   {"syllables", r.stats.syllables},
                   {"characters", r.stats.characters},
                   {"hard_words", r.stats.hard_words},
                   {"dictionary_hit_rate", r.hit_rate()},
                   {"n", r.n}}
                  .dump() +
              "\n";
  } else {
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows)
      cells.push_back({r.label, util::fixed(r.mean(r.fre), 2), util::fixed(r.mean(r.fkgl), 2),
                       util::fixed(r.mean(r.gfi), 2), util::fixed(r.mean(r.ari), 2), std::to_string(r.stats.words),
                       std::to_string(r.stats.sentences), std::to_string(r.stats.syllables),
                       std::to_string(r.stats.characters), std::to_string(r.stats.hard_words),
                       util::fixed(r.hit_rate() * 100.0, 1) + "%", std::to_string(r.n)});
    text = g.format == "csv" ? render_csv(header, cells) : render_text_table(header, cells);
  }
  emit(io, out_path, text);

  if (!plots.empty()) {
    const std::vector<std::tuple<std::string, std::string, bool, double detail::ReadabilityRow::*>> metrics = {
        {"fre", "Flesch Reading Ease", true, &detail::ReadabilityRow::fre},
        {"fkgl", "Flesch-Kincaid Grade Level", false, &detail::ReadabilityRow::fkgl},
        {"gfi", "Gunning-Fog Index", false, &detail::ReadabilityRow::gfi},
        {"ari", "Automated Readability Index", false, &detail::ReadabilityRow::ari}};
    for (const auto& [key, title, higher, member] : metrics) {
      charts::BarChart chart{title, higher, {}};
      for (const auto& r : rows) chart.bars.emplace_back(r.label, r.mean(r.*member));
      const auto path = charts::write_svg(chart, plots, key);
      if (!g.quiet) io.err << "wrote " << path << "\n";
    }
  }
  return 0;
}

struct AuditFlags {
  ThresholdFlags th;
  bool types_mode = false;
  bool no_target_exemption = false;
  bool exact_targets = false;

  void attach(CLI::App* app) {
    th.attach(app);
    app->add_flag("--types-mode", types_mode, "Average over word types instead of tokens");
    app->add_flag("--no-target-exemption", no_target_exemption, "Judge target words like any other word");
    app->add_flag("--exact-targets", exact_targets, "Match target words exactly, not by lemma");
  }
  AuditOptions options() const {
    AuditOptions o;
    o.threshold = th.threshold;
    o.op = th.op();
    o.types_mode = types_mode;
    o.target_exemption = !no_target_exemption;
    o.lemma_target_match = !exact_targets;
    return o;
  }
};

inline std::vector<Metric> parse_metrics(const std::vector<std::string>& keys) {
  if (keys.empty()) return all_metrics();
  std::vector<Metric> out;
  for (const auto& k : keys) out.push_back(metric_from_key(k));
  return out;
}

inline int run_audit(Io& io, const Globals& g, const std::string& corpus_path, const LexiconFlags& lf,
                     const AuditFlags& af, const std::string& per_story, const std::string& plots,
                     const std::string& out_path) {
  const auto lex = lf.load();
  const auto stories = parse_corpus(read_input(corpus_path, io.in), corpus_path);
  std::vector<AuditReport> reports;
  auto summary = summarize_corpus(stories, lex, af.options(), g.jobs, &reports);
  summary.label = stem_of(corpus_path);
  emit(io, out_path, render_summary(summary, g.format));
  if (!per_story.empty()) {
    std::string lines;
    for (const auto& r : reports) lines += audit_to_json(r).dump() + "\n";
    util::write_file(per_story, lines);
  }
  if (!plots.empty())
    for (const auto& p : emit_charts({&summary}, all_metrics(), plots))
      if (!g.quiet) io.err << "wrote " << p << "\n";
  return 0;
}

inline int run_report(Io& io, const Globals& g, const std::vector<std::string>& corpora, const LexiconFlags& lf,
                      const AuditFlags& af, const std::vector<std::string>& metric_keys, const std::string& plots,
                      const std::string& out_path) {
  const auto lex = lf.load();
  const auto metrics = parse_metrics(metric_keys);
  std::vector<CorpusSummary> summaries;
  for (const auto& path : corpora) {
    summaries.push_back(summarize_corpus(load_corpus(path), lex, af.options(), g.jobs));
    summaries.back().label = stem_of(path);
  }
  std::string text;
  for (const auto& s : summaries) {
    if (g.format == "table") text += "## " + s.label + "\n";
    text += render_summary(s, g.format);
    if (g.format == "table") text += "\n";
  }
  if (summaries.size() == 2 && g.format == "table")
    text += render_comparison(compare_corpora(summaries[0], summaries[1], metrics));
  emit(io, out_path, text);
  if (!plots.empty()) {
    std::vector<const CorpusSummary*> ptrs;
    for (const auto& s : summaries) ptrs.push_back(&s);
    for (const auto& p : emit_charts(ptrs, metrics, plots))
      if (!g.quiet) io.err << "wrote " << p << "\n";
  }
  return 0;
}

inline int run_targets_filter(Io& io, const Globals& g, const LexiconFlags& lf, const BandFilterOptions& opts,
                              const std::string& out_path) {
  const auto lex = lf.load();
  BandFilterTrace trace;
  const auto cands = band_filter(lex, opts, &trace);
  emit(io, out_path, render_candidates(cands));
  if (!g.quiet)
    io.err << "in band: " << trace.in_band << "; dropped: not a single word " << trace.dropped_not_single_word
           << ", adverb " << trace.dropped_adverb << ", multiple POS " << trace.dropped_multi_pos << ", other POS "
           << trace.dropped_other_pos << ", concreteness " << trace.dropped_concreteness << ", lemma family "
           << trace.dropped_family << "; kept " << cands.size() << "\n";
  return 0;
}

inline int run_targets_select(Io& io, const std::string& candidates, const std::string& ratings,
                              const std::string& quota, const std::string& composite, const std::string& out_path) {
  if (ratings.empty()) throw Error("cli.missing_ratings", "--ratings is required");
  auto cands = parse_candidates(read_input(candidates, io.in), candidates);
  attach_ratings(cands, load_ratings(ratings));
  std::vector<TargetCandidate> rated;
  for (auto& c : cands)
    if (!c.learnability.empty()) rated.push_back(std::move(c));
  const auto scored = aggregate_scores(rated, composite_from_string(composite));
  emit(io, out_path, render_target_list(select_quota(scored, quota.empty() ? default_quota() : parse_quota(quota))));
  return 0;
}

inline int run_targets_draw(Io& io, const Globals& g, const std::string& list, std::size_t sets,
                            const std::string& out_path) {
  std::vector<std::string> words;
  for (const auto& t : load_target_list(list.empty() ? bundled_target_list_path() : list)) words.push_back(t.word);
  std::string text;
  for (const auto& s : draw_target_sets(words, sets, g.seed)) text += util::join(s, ",") + "\n";
  emit(io, out_path, text);
  return 0;
}

inline int run_targets_list(Io& io, const Globals& g, const std::string& list) {
  const auto words = load_target_list(list.empty() ? bundled_target_list_path() : list);
  if (g.format == "table") {
    std::map<std::string, std::size_t> counts;
    for (const auto& w : words) ++counts[w.pos];
    std::vector<std::vector<std::string>> rows;
    for (const auto& [pos, n] : counts) rows.push_back({pos.empty() ? "-" : pos, std::to_string(n)});
    rows.push_back({"total", std::to_string(words.size())});
    io.out << render_text_table({"POS", "Words"}, rows);
    return 0;
  }
  io.out << "word\tpos\n";
  for (const auto& w : words) io.out << w.word << "\t" << w.pos << "\n";
  return 0;
}

/// Lines of exactly five comma-separated words are target sets; anything else is a
/// target-word list from which `needed` sets are drawn with `seed`.
inline std::vector<std::vector<std::string>> load_target_sets(const std::string& path, std::size_t needed,
                                                              std::uint64_t seed) {
  const auto lines = util::read_lines(path);
  std::vector<std::vector<std::string>> sets;
  bool all_sets = true;
  for (const auto& raw : lines) {
    const auto line = util::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto parts = util::split(line, ',');
    if (parts.size() != 5) {
      all_sets = false;
      break;
    }
    for (auto& p : parts) p = normalize_surface(p);
    sets.push_back(std::move(parts));
  }
  if (all_sets && !sets.empty()) {
    if (sets.size() < needed)
      throw Error("genclient.bad_targets", path + " has " + std::to_string(sets.size()) + " target sets, " +
                                               std::to_string(needed) + " needed");
    sets.resize(needed);
    return sets;
  }
  std::vector<std::string> words;
  for (const auto& t : load_target_list(path)) words.push_back(t.word);
  return draw_target_sets(words, needed, seed);
}

inline int run_generate(Io& io, const Globals& g, const std::string& backend_cfg, const std::string& prompt,
                        const std::string& targets_file, std::size_t n, std::size_t per_set,
                        const std::string& model_label, const std::string& out_path) {
  if (backend_cfg.empty()) throw Error("cli.missing_backend", "--backend is required");
  if (targets_file.empty()) throw Error("cli.missing_targets", "--targets-file is required");
  if (out_path.empty()) throw Error("cli.missing_out", "--out is required");
  if (per_set == 0 || n == 0 || n % per_set != 0)
    throw Error("cli.bad_flags", "--n must be a positive multiple of --per-set");
  auto cfg = load_backend_config(backend_cfg);
  cfg.replay = resolve_relative(backend_cfg, cfg.replay);
  auto backend = make_backend(cfg);

  std::vector<const PromptTemplate*> templates;
  if (prompt == "all")
    for (const auto& t : prompt_templates()) templates.push_back(&t);
  else
    templates.push_back(&prompt_template(prompt));

  CorpusWriter writer(out_path);
  BatchOptions opts;
  opts.n_per_set = per_set;
  opts.jobs = g.jobs;
  opts.model_label = model_label;
  opts.retry.max_retries = cfg.max_retries;
  opts.retry.backoff_base_s = cfg.backoff_base_s;
  opts.sink = std::ref(writer);
  const auto sets = load_target_sets(targets_file, n / per_set, g.seed);
  std::size_t records = 0, failures = 0;
  for (const auto* t : templates) {
    const auto r = generate_batch(*backend, *t, sets, opts);
    records += r.records.size();
    failures += r.failures.size();
    if (!g.quiet)
      for (const auto& f : r.failures)
        io.err << "failed: prompt " << t->id << " set " << f.set_index << " sample " << f.sample << ": " << f.kind
               << " after " << f.retries << " retries: " << f.message << "\n";
  }
  if (!g.quiet) io.err << "generated " << records << " stories, " << failures << " failures -> " << out_path << "\n";
  return 0;
}

inline std::vector<StoryRecord> stories_from_input(const std::string& content, const std::string& origin) {
  if (looks_like_corpus(content)) return parse_corpus(content, origin);
  StoryRecord s;
  s.id = stem_of(origin);
  s.text = content;
  return {s};
}

inline BackendSet build_backends(const std::string& cfg, const std::vector<std::string>& synonyms,
                                 const std::vector<std::string>& antonyms) {
  BackendSet set;
  if (!cfg.empty()) set.add_config(cfg);
  for (const auto& s : synonyms) set.add_thesaurus(s);
  for (const auto& a : antonyms) set.merge_antonyms(a);
  if (set.owned.empty()) throw Error("simplify.no_backends", "give --backends or --synonyms");
  return set;
}

inline int run_simplify(Io& io, const Globals& g, const std::string& input, const LexiconFlags& lf,
                        const ThresholdFlags& th, const BackendSet& backends, std::size_t k, bool trace,
                        bool no_target_exemption, const std::string& out_path) {
  const auto lex = lf.load();
  const auto content = read_input(input, io.in);
  const bool corpus = looks_like_corpus(content);
  const auto stories = stories_from_input(content, input);
  SimplifyOptions opts;
  opts.complex.threshold = th.threshold;
  opts.complex.op = th.op();
  opts.k = k;
  opts.exempt_targets = !no_target_exemption;
  std::string text;
  for (const auto& s : stories) {
    const auto result = simplify_story(s, lex, backends.pointers(), backends.antonyms, opts);
    if (g.format == "jsonl") {
      text += simplified_to_json(result, trace).dump() + "\n";
      continue;
    }
    if (!corpus && g.format == "table" && !trace) {
      text += result.simplified;
      if (!text.empty() && text.back() != '\n') text += "\n";
      continue;
    }
    text += "## " + result.id + "\n";
    std::vector<std::vector<std::string>> rows;
    for (const auto& sp : result.spans) {
      std::vector<std::string> cands;
      for (const auto& c : sp.list.candidates)
        cands.push_back(c.word + "(" + (c.aoa ? util::fixed(*c.aoa, 2) : std::string("?")) + ")");
      rows.push_back({std::to_string(sp.list.original.sentence_idx), sp.list.original.word,
                      util::fixed(sp.list.original.aoa, 2), sp.substitute ? *sp.substitute : "-",
                      util::join(cands, " ")});
      if (trace)
        for (const auto& t : sp.list.trace) rows.push_back({"", "", "", "x " + t.word, t.rule + ": " + t.detail});
    }
    text += g.format == "csv" ? render_csv({"Sentence", "Word", "AoA", "Substitute", "Candidates"}, rows)
                              : render_text_table({"Sentence", "Word", "AoA", "Substitute", "Candidates"}, rows);
    text += result.simplified;
    if (!text.empty() && text.back() != '\n') text += "\n";
  }
  emit(io, out_path, text);
  return 0;
}

struct EvalFlags {
  std::string dataset;
  std::string dataset_format = "cds";
  std::vector<std::string> preds;
  bool gold = false;
  std::string pipeline;
  std::vector<std::string> synonyms;
  std::vector<std::string> antonyms;
  std::size_t k = 3;
  std::optional<std::uint64_t> split_seed;
  double train_frac = 0.7;
  std::string side = "all";
  std::string write_preds;
  std::string per_instance;
};

inline int run_eval(Io& io, const Globals& g, const LexiconFlags& lf, const EvalFlags& ef, const std::string& out_path) {
  if (ef.dataset.empty()) throw Error("cli.missing_dataset", "--dataset is required");
  const auto lex = lf.load();
  auto instances = load_dataset(ef.dataset, dataset_format_from_string(ef.dataset_format));
  if (ef.side != "all") {
    const auto parts = split(instances, ef.train_frac, ef.split_seed.value_or(g.seed));
    instances = ef.side == "train" ? parts.train : parts.test;
  }
  std::vector<std::pair<std::string, Predictions>> systems;
  if (ef.gold) systems.emplace_back("gold", gold_as_predictions(instances));
  for (const auto& spec : ef.preds) {
    const auto eq = spec.find('=');
    const auto path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    systems.emplace_back(eq == std::string::npos ? stem_of(path) : spec.substr(0, eq), load_predictions(path));
  }
  if (!ef.pipeline.empty() || !ef.synonyms.empty()) {
    const auto set = build_backends(ef.pipeline, ef.synonyms, ef.antonyms);
    auto p = pipeline_predictions(instances, lex, set.pointers(), set.antonyms, ef.k);
    if (!ef.write_preds.empty()) util::write_file(ef.write_preds, predictions_to_string(p));
    systems.emplace_back("pipeline", std::move(p));
  }
  if (systems.empty()) throw Error("cli.missing_predictions", "give --preds, --gold-as-preds or --pipeline");
  std::vector<NamedResult> results;
  for (const auto& [name, p] : systems) results.push_back({name, score(instances, p, lex, ef.side)});
  emit(io, out_path, render_report(results, g.format));
  if (!ef.per_instance.empty()) {
    std::string lines;
    for (const auto& r : results)
      for (const auto& s : r.result.per_instance)
        lines += json{{"system", r.system},   {"id", s.id},         {"predicted", s.predicted}, {"hit1", s.hit[0]},
                      {"hit2", s.hit[1]}, {"hit3", s.hit[2]}, {"valid", s.valid}}
                     .dump() +
                 "\n";
    util::write_file(ef.per_instance, lines);
  }
  return 0;
}

inline int run_split(Io& io, const Globals& g, const std::string& dataset, const std::string& fmt_name,
                     double train_frac, std::optional<std::uint64_t> split_seed, const std::string& train_out,
                     const std::string& test_out) {
  if (dataset.empty()) throw Error("cli.missing_dataset", "--dataset is required");
  if (train_out.empty() || test_out.empty()) throw Error("cli.missing_out", "--train-out and --test-out are required");
  const auto fmt = dataset_format_from_string(fmt_name);
  const auto parts = split(load_dataset(dataset, fmt), train_frac, split_seed.value_or(g.seed));
  const auto render = [&](const auto& d) { return fmt == DatasetFormat::cds ? dataset_to_cds(d) : dataset_to_tsar(d); };
  util::write_file(train_out, render(parts.train));
  util::write_file(test_out, render(parts.test));
  io.out << "train " << parts.train.size() << " test " << parts.test.size() << "\n";
  return 0;
}

struct AnnotateFlags {
  std::string state;
  std::string tokens;
  std::string static_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t limit = 750;
};

inline AnnotationStore open_store(const Lexicon& lex, const std::string& state) {
  if (state.empty()) throw Error("cli.missing_state", "--state is required");
  return AnnotationStore(lex, AnnotationStore::log_path_for(state), utc_timestamp);
}

inline int run_annotate_enqueue(Io& io, const Globals& g, const std::string& corpus, const LexiconFlags& lf,
                                const ThresholdFlags& th, const AnnotateFlags& af) {
  const auto lex = lf.load();
  auto store = open_store(lex, af.state);
  ComplexOptions opts;
  opts.threshold = th.threshold;
  opts.op = th.op();
  const auto items = sample_instances(load_corpus(corpus), lex, opts, af.limit, g.seed);
  const auto ids = store.enqueue(items, g.seed);
  io.out << "enqueued " << ids.size() << " tasks (" << store.size() << " total)\n";
  return 0;
}

inline int run_annotate_serve(Io& io, const Globals& g, const LexiconFlags& lf, const AnnotateFlags& af) {
  const auto lex = lf.load();
  auto store = open_store(lex, af.state);
  AnnotationServer server(store, af.tokens.empty() ? TokenTable{} : load_token_table(af.tokens), af.static_dir);
  if (!g.quiet)
    io.err << "serving " << store.size() << " tasks on http://" << af.host << ":" << af.port
           << (af.tokens.empty() ? " (no auth)" : " (token auth)") << "\n";
  server.serve(af.host, af.port);
  return 0;
}

inline int run_annotate_export(Io& io, const AnnotateFlags& af, const std::string& out_path) {
  const Lexicon lex;
  const auto store = open_store(lex, af.state);
  emit(io, out_path, store.export_cds());
  return 0;
}

inline int run_annotate_stats(Io& io, const AnnotateFlags& af) {
  const Lexicon lex;
  const auto store = open_store(lex, af.state);
  io.out << stats_to_json(store.stats()).dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Dispatch

inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr,
                    std::istream& in = std::cin) {
  Io io{out, err, in};
  Globals g;
  CLI::App app{"kidlex: lexical simplicity audits, story generation and lexical simplification", "kidlex"};
  app.set_config("--config", "", "TOML/INI file with option defaults; command-line flags win");
  app.add_option("--seed", g.seed, "Seed for every random draw")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads")->capture_default_str()->check(CLI::Range(1u, 256u));
  app.add_option("--format", g.format, "Output format")
      ->capture_default_str()
      ->check(CLI::IsMember({"table", "csv", "jsonl"}));
  app.add_flag("-q,--quiet", g.quiet, "No progress or config log on stderr");
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_path;
  std::function<int()> action;

  // lexicon
  LexiconFlags lex_lf;
  std::vector<std::string> lookups;
  std::string coverage_file;
  auto* lexicon = app.add_subcommand("lexicon", "Load a lexicon, report its shape and look words up");
  lex_lf.attach(lexicon);
  lexicon->add_option("--lookup", lookups, "Words to look up");
  lexicon->add_option("--coverage", coverage_file, "Text file whose word coverage to report");
  lexicon->callback([&] { action = [&] { return run_lexicon(io, g, lex_lf, lookups, coverage_file); }; });

  // readability
  std::string rd_input, rd_syll, rd_plots;
  bool rd_per_story = false;
  auto* readab = app.add_subcommand("readability", "FRE, FKGL, GFI and ARI for a text or story corpus");
  readab->add_option("input", rd_input, "Text file, story corpus, or - for stdin")->required();
  readab->add_option("--syllable-dict", rd_syll, "word<TAB>count syllable table");
  readab->add_option("--plots", rd_plots, "Directory for one SVG bar chart per metric");
  readab->add_flag("--per-story", rd_per_story, "One row per story instead of per model");
  readab->add_option("--out", out_path, "Output file (default stdout)");
  readab->callback([&] { action = [&] { return run_readability(io, g, rd_input, rd_syll, rd_plots, rd_per_story, out_path); }; });

  // audit
  std::string au_corpus, au_per_story, au_plots;
  LexiconFlags au_lf;
  AuditFlags au_flags;
  auto* audit = app.add_subcommand("audit", "Audit a story corpus for lexical simplicity");
  audit->add_option("corpus", au_corpus, "Story corpus (one JSON record per line)")->required();
  au_lf.attach(audit);
  au_flags.attach(audit);
  audit->add_option("--per-story", au_per_story, "Write per-story audit records here");
  audit->add_option("--plots", au_plots, "Directory for one SVG bar chart per metric");
  audit->add_option("--out", out_path, "Output file (default stdout)");
  audit->callback([&] {
    action = [&] { return run_audit(io, g, au_corpus, au_lf, au_flags, au_per_story, au_plots, out_path); };
  });

  // report
  std::vector<std::string> rp_corpora, rp_metrics;
  std::string rp_plots;
  LexiconFlags rp_lf;
  AuditFlags rp_flags;
  auto* report = app.add_subcommand("report", "Summaries, comparison and charts for one or more corpora");
  report->add_option("corpora", rp_corpora, "Story corpora")->required();
  rp_lf.attach(report);
  rp_flags.attach(report);
  report->add_option("--metrics", rp_metrics, "Metric keys (default all)");
  report->add_option("--plots", rp_plots, "Directory for SVG bar charts");
  report->add_option("--out", out_path, "Output file (default stdout)");
  report->callback([&] {
    action = [&] { return run_report(io, g, rp_corpora, rp_lf, rp_flags, rp_metrics, rp_plots, out_path); };
  });

  // targets
  auto* targets = app.add_subcommand("targets", "Target-word filtering, selection and set drawing");
  targets->require_subcommand(1);
  LexiconFlags tg_lf;
  BandFilterOptions tg_band;
  auto* tfilter = targets->add_subcommand("filter", "AoA band filter with lexical cleanup");
  tg_lf.attach(tfilter);
  tfilter->add_option("--lo", tg_band.lo, "Lowest AoA kept")->capture_default_str();
  tfilter->add_option("--hi", tg_band.hi, "Highest AoA kept")->capture_default_str();
  tfilter->add_option("--min-concreteness", tg_band.min_concreteness, "Concreteness cutoff")->capture_default_str();
  tfilter->add_option("--out", out_path, "Output file (default stdout)");
  tfilter->callback([&] { action = [&] { return run_targets_filter(io, g, tg_lf, tg_band, out_path); }; });
  std::string ts_cands = "-", ts_ratings, ts_quota, ts_composite = "min";
  auto* tselect = targets->add_subcommand("select", "Aggregate ratings and fill per-POS quotas");
  tselect->add_option("--candidates", ts_cands, "Output of targets filter, or - for stdin")->capture_default_str();
  tselect->add_option("--ratings", ts_ratings, "word,annotator,learnability,imageability,appropriateness");
  tselect->add_option("--quota", ts_quota, "e.g. noun=150,verb=50,adj=50");
  tselect->add_option("--composite", ts_composite, "min | mean | product")->capture_default_str();
  tselect->add_option("--out", out_path, "Output file (default stdout)");
  tselect->callback([&] {
    action = [&] { return run_targets_select(io, ts_cands, ts_ratings, ts_quota, ts_composite, out_path); };
  });
  std::string td_list;
  std::size_t td_sets = 50;
  auto* tdraw = targets->add_subcommand("draw", "Draw 5-word target sets");
  tdraw->add_option("--list", td_list, "Target word list (default: bundled 250-word list)");
  tdraw->add_option("--sets", td_sets, "Number of sets")->capture_default_str();
  tdraw->add_option("--out", out_path, "Output file (default stdout)");
  tdraw->callback([&] { action = [&] { return run_targets_draw(io, g, td_list, td_sets, out_path); }; });
  auto* tlist = targets->add_subcommand("list", "Show a target word list");
  tlist->add_option("--list", td_list, "Target word list (default: bundled 250-word list)");
  tlist->callback([&] { action = [&] { return run_targets_list(io, g, td_list); }; });

  // generate
  std::string gn_backend, gn_prompt = "preschool", gn_targets, gn_label;
  std::size_t gn_n = 50, gn_per_set = 1;
  auto* generate = app.add_subcommand("generate", "Generate target-word stories through a text backend");
  generate->add_option("--backend", gn_backend, "Backend config (JSON)");
  generate->add_option("--prompt", gn_prompt, "Prompt id, or all")->capture_default_str();
  generate->add_option("--targets-file", gn_targets, "Target sets (5 comma-separated words per line) or a word list");
  generate->add_option("--n", gn_n, "Stories per prompt")->capture_default_str();
  generate->add_option("--per-set", gn_per_set, "Stories per target set")->capture_default_str();
  generate->add_option("--model-label", gn_label, "Model label recorded in each story (default: backend name)");
  generate->add_option("--out", out_path, "Story corpus to write");
  generate->callback([&] {
    action = [&] { return run_generate(io, g, gn_backend, gn_prompt, gn_targets, gn_n, gn_per_set, gn_label, out_path); };
  });

  // simplify
  std::string sp_input, sp_cfg;
  std::vector<std::string> sp_syn, sp_ant;
  LexiconFlags sp_lf;
  ThresholdFlags sp_th;
  std::size_t sp_k = 3;
  bool sp_trace = false, sp_no_exempt = false;
  auto* simplify = app.add_subcommand("simplify", "Find complex words and propose simpler substitutes");
  simplify->add_option("input", sp_input, "Story corpus, text file, or - for stdin")->required();
  sp_lf.attach(simplify);
  sp_th.attach(simplify);
  simplify->add_option("--backends", sp_cfg, "Candidate backend config (JSON)");
  simplify->add_option("--synonyms", sp_syn, "word<TAB>synonyms table used as a thesaurus backend");
  simplify->add_option("--antonyms", sp_ant, "word<TAB>antonyms table");
  simplify->add_option("--k", sp_k, "Candidates requested per backend")->capture_default_str();
  simplify->add_flag("--trace", sp_trace, "Show why candidates were dropped");
  simplify->add_flag("--no-target-exemption", sp_no_exempt, "Simplify target words too");
  simplify->add_option("--out", out_path, "Output file (default stdout)");
  simplify->callback([&] {
    action = [&] {
      const auto set = build_backends(sp_cfg, sp_syn, sp_ant);
      return run_simplify(io, g, sp_input, sp_lf, sp_th, set, sp_k, sp_trace, sp_no_exempt, out_path);
    };
  });

  // eval
  EvalFlags ev;
  LexiconFlags ev_lf;
  auto* eval = app.add_subcommand("eval", "Score substitution predictions against a gold dataset");
  ev_lf.attach(eval);
  eval->add_option("--dataset", ev.dataset, "Gold dataset");
  eval->add_option("--dataset-format", ev.dataset_format, "cds | tsar")->capture_default_str();
  eval->add_option("--preds", ev.preds, "Predictions file, optionally name=path (repeatable)");
  eval->add_flag("--gold-as-preds", ev.gold, "Score the gold lists themselves");
  eval->add_option("--pipeline", ev.pipeline, "Candidate backend config; scores the simplification pipeline");
  eval->add_option("--synonyms", ev.synonyms, "Thesaurus table for the pipeline");
  eval->add_option("--antonyms", ev.antonyms, "Antonym table for the pipeline");
  eval->add_option("--k", ev.k, "Candidates per backend for the pipeline")->capture_default_str();
  eval->add_option("--split-seed", ev.split_seed, "Split seed (default: --seed)");
  eval->add_option("--train-frac", ev.train_frac, "Training fraction")->capture_default_str();
  eval->add_option("--side", ev.side, "all | train | test")
      ->capture_default_str()
      ->check(CLI::IsMember({"all", "train", "test"}));
  eval->add_option("--write-preds", ev.write_preds, "Write pipeline predictions here");
  eval->add_option("--per-instance", ev.per_instance, "Write per-instance scores here");
  eval->add_option("--out", out_path, "Output file (default stdout)");
  eval->callback([&] { action = [&] { return run_eval(io, g, ev_lf, ev, out_path); }; });

  // split
  std::string sl_dataset, sl_fmt = "cds", sl_train, sl_test;
  double sl_frac = 0.7;
  std::optional<std::uint64_t> sl_seed;
  auto* splitc = app.add_subcommand("split", "Seeded train/test split of a dataset");
  splitc->add_option("--dataset", sl_dataset, "Dataset file");
  splitc->add_option("--dataset-format", sl_fmt, "cds | tsar")->capture_default_str();
  splitc->add_option("--train-frac", sl_frac, "Training fraction")->capture_default_str();
  splitc->add_option("--split-seed", sl_seed, "Split seed (default: --seed)");
  splitc->add_option("--train-out", sl_train, "Training side output");
  splitc->add_option("--test-out", sl_test, "Test side output");
  splitc->callback([&] {
    action = [&] { return run_split(io, g, sl_dataset, sl_fmt, sl_frac, sl_seed, sl_train, sl_test); };
  });

  // annotate
  AnnotateFlags an;
  LexiconFlags an_lf;
  ThresholdFlags an_th;
  std::string an_corpus;
  auto* annotate = app.add_subcommand("annotate", "Dataset annotation service");
  annotate->require_subcommand(1);
  auto* aserve = annotate->add_subcommand("serve", "Serve the annotation HTTP API");
  an_lf.attach(aserve);
  aserve->add_option("--state", an.state, "State directory (event log)");
  aserve->add_option("--host", an.host, "Bind address")->capture_default_str();
  aserve->add_option("--port", an.port, "Port")->capture_default_str();
  aserve->add_option("--tokens", an.tokens, "JSON token table enabling authentication");
  aserve->add_option("--static", an.static_dir, "Directory of UI assets to serve at /");
  aserve->callback([&] { action = [&] { return run_annotate_serve(io, g, an_lf, an); }; });
  auto* aenq = annotate->add_subcommand("enqueue", "Queue complex-word spans from a corpus");
  aenq->add_option("corpus", an_corpus, "Story corpus")->required();
  an_lf.attach(aenq);
  an_th.attach(aenq);
  aenq->add_option("--state", an.state, "State directory (event log)");
  aenq->add_option("--limit", an.limit, "Spans drawn at random (0 = all)")->capture_default_str();
  aenq->callback([&] { action = [&] { return run_annotate_enqueue(io, g, an_corpus, an_lf, an_th, an); }; });
  auto* aexp = annotate->add_subcommand("export", "Write accepted annotations as a CDS dataset");
  aexp->add_option("--state", an.state, "State directory (event log)");
  aexp->add_option("--out", out_path, "Output file (default stdout)");
  aexp->callback([&] { action = [&] { return run_annotate_export(io, an, out_path); }; });
  auto* astats = annotate->add_subcommand("stats", "Task counts by status");
  astats->add_option("--state", an.state, "State directory (event log)");
  astats->callback([&] { action = [&] { return run_annotate_stats(io, an); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: cli.usage: " << e.what() << "\n";
    const CLI::App* failing = &app;
    for (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front(); sub;
         sub = sub->get_subcommands().empty() ? nullptr : sub->get_subcommands().front())
      failing = sub;
    err << failing->help();
    return 2;
  }

  if (!g.quiet) {
    std::string path, prefix;
    const CLI::App* leaf = &app;
    while (!leaf->get_subcommands().empty()) {
      leaf = leaf->get_subcommands().front();
      path += (path.empty() ? "" : " ") + leaf->get_name();
      prefix += leaf->get_name() + ".";
    }
    err << "# kidlex " << path << ": effective config\n"
        << "seed=" << g.seed << "\njobs=" << g.jobs << "\nformat=\"" << g.format << "\"\nquiet=false\n";
    std::istringstream lines(leaf->config_to_str(true, false));
    for (std::string line; std::getline(lines, line);)
      if (!line.empty()) err << prefix << line << "\n";
    err << "# end config\n";
  }

  try {
    if (!action) throw Error("cli.usage", "no subcommand action");
    return action();
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    err << "error: io.bad_json: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: io.filesystem: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace kidlex::cli

#endif  // KIDLEX_CLI_HPP
