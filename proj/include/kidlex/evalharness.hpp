#ifndef KIDLEX_EVALHARNESS_HPP
#define KIDLEX_EVALHARNESS_HPP

// Lexical-simplification evaluation: gold datasets (TSAR and CDS layouts),
// seeded train/test split, scoring and report rendering.
//
// Accuracy counts a hit only when the top prediction equals gold rank 1
// (case-insensitive, trimmed). Accuracy@k asks whether gold rank 1 is among
// the top k. Validity requires the top prediction to have a known AoA strictly
// below the complex word's. Missing predictions count as miss and invalid.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kidlex/audit.hpp"
#include "kidlex/lexicon.hpp"
#include "kidlex/simplify.hpp"
#include "kidlex/util.hpp"

namespace kidlex {

struct SimplificationInstance {
  std::string id;
  std::string story_id;        // CDS only
  std::size_t span_start = 0;  // CDS only: byte offset of the word within its story
  std::string sentence;
  std::string complex_word;
  std::vector<std::string> gold;  // rank order, rank 1 first
  friend bool operator==(const SimplificationInstance&, const SimplificationInstance&) = default;
};

enum class DatasetFormat { cds, tsar };

inline DatasetFormat dataset_format_from_string(std::string_view s) {
  if (s == "cds") return DatasetFormat::cds;
  if (s == "tsar") return DatasetFormat::tsar;
  throw Error("eval.bad_format", "dataset format must be cds or tsar");
}

namespace detail {

// CDS fields escape backslash, tab and newline.
inline std::string cds_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '\\') out += "\\\\";
    else if (c == '\t') out += "\\t";
    else if (c == '\n') out += "\\n";
    else if (c == '\r') out += "\\r";
    else out += c;
  }
  return out;
}

inline std::string cds_unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    const char n = s[++i];
    out += n == 't' ? '\t' : n == 'n' ? '\n' : n == 'r' ? '\r' : n;
  }
  return out;
}

inline bool word_in_sentence(const std::string& sentence, const std::string& word) {
  return locate_word(sentence, word).has_value();
}

}  // namespace detail

/// Clean a gold list: trim, drop empties and entries equal to the complex word,
/// collapse case-insensitive duplicates keeping the first rank.
inline std::vector<std::string> clean_gold(const std::vector<std::string>& raw, std::string_view complex_word) {
  const auto original = normalize_surface(complex_word);
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& g : raw) {
    const auto t = util::trim(g);
    const auto key = normalize_surface(t);
    if (key.empty() || key == original || !seen.insert(key).second) continue;
    out.push_back(t);
  }
  return out;
}

/// TSAR: `sentence<TAB>complex_word<TAB>sub1<TAB>sub2...`.
/// CDS: `instance_id<TAB>story_id<TAB>span_start<TAB>sentence<TAB>complex_word<TAB>sub1...`,
/// lines starting with '#' are comments. All offending rows are reported together.
inline std::vector<SimplificationInstance> parse_dataset(std::string_view content, DatasetFormat fmt,
                                                         const std::string& origin = "dataset") {
  std::vector<SimplificationInstance> out;
  std::vector<std::string> problems;
  std::set<std::string> ids;
  std::size_t rows = 0;
  const auto lines = util::split(util::strip_utf8_bom(std::string(content)), '\n');
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (util::trim_view(line).empty() || (fmt == DatasetFormat::cds && line[0] == '#')) continue;
    const auto where = origin + ":" + std::to_string(i + 1) + ": ";
    ++rows;
    auto f = util::split(line, '\t');
    SimplificationInstance inst;
    std::vector<std::string> gold;
    if (fmt == DatasetFormat::tsar) {
      if (f.size() < 2) {
        problems.push_back(where + "expected sentence<TAB>word<TAB>substitutes");
        continue;
      }
      inst.id = std::to_string(rows);
      inst.sentence = f[0];
      inst.complex_word = util::trim(f[1]);
      gold.assign(f.begin() + 2, f.end());
    } else {
      if (f.size() < 5) {
        problems.push_back(where + "expected id, story, offset, sentence, word, substitutes");
        continue;
      }
      for (auto& x : f) x = detail::cds_unescape(x);
      inst.id = util::trim(f[0]);
      inst.story_id = util::trim(f[1]);
      const auto off = util::parse_int(util::trim(f[2]));
      if (!off || *off < 0) {
        problems.push_back(where + "span offset must be a non-negative integer");
        continue;
      }
      inst.span_start = static_cast<std::size_t>(*off);
      inst.sentence = f[3];
      inst.complex_word = util::trim(f[4]);
      gold.assign(f.begin() + 5, f.end());
    }
    if (inst.id.empty() || !ids.insert(inst.id).second) {
      problems.push_back(where + "missing or duplicate instance id '" + inst.id + "'");
      continue;
    }
    if (inst.complex_word.empty() || !detail::word_in_sentence(inst.sentence, inst.complex_word)) {
      problems.push_back(where + "complex word '" + inst.complex_word + "' does not occur in the sentence");
      continue;
    }
    inst.gold = clean_gold(gold, inst.complex_word);
    if (inst.gold.empty()) {
      problems.push_back(where + "empty gold list");
      continue;
    }
    out.push_back(std::move(inst));
  }
  if (!problems.empty()) {
    std::string msg = std::to_string(problems.size()) + " invalid row(s):";
    for (std::size_t i = 0; i < problems.size() && i < 20; ++i) msg += "\n  " + problems[i];
    throw Error("eval.bad_dataset", msg);
  }
  return out;
}

inline std::vector<SimplificationInstance> load_dataset(const std::string& path, DatasetFormat fmt) {
  return parse_dataset(util::read_file(path), fmt, path);
}

inline std::string cds_header() {
  return "# instance_id\tstory_id\tspan_start\tsentence\tcomplex_word\tgold...\n";
}

inline std::string dataset_to_cds(const std::vector<SimplificationInstance>& instances) {
  std::string out = cds_header();
  for (const auto& i : instances) {
    out += detail::cds_escape(i.id) + "\t" + detail::cds_escape(i.story_id) + "\t" + std::to_string(i.span_start) +
           "\t" + detail::cds_escape(i.sentence) + "\t" + detail::cds_escape(i.complex_word);
    for (const auto& g : i.gold) out += "\t" + detail::cds_escape(g);
    out += "\n";
  }
  return out;
}

inline std::string dataset_to_tsar(const std::vector<SimplificationInstance>& instances) {
  std::string out;
  for (const auto& i : instances) {
    out += i.sentence + "\t" + i.complex_word;
    for (const auto& g : i.gold) out += "\t" + g;
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Split

struct Split {
  std::vector<SimplificationInstance> train;
  std::vector<SimplificationInstance> test;
};

inline std::size_t train_size(std::size_t n, double train_frac) {
  return static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(n) + 1e-9));
}

/// Seeded shuffle, then train = floor(frac * n); each side keeps dataset order.
inline Split split(const std::vector<SimplificationInstance>& instances, double train_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw Error("eval.bad_fraction", "train fraction must lie in (0, 1)");
  if (instances.size() < 2) throw Error("eval.too_small", "need at least 2 instances to split");
  std::vector<std::size_t> order(instances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  util::seeded_shuffle(order, seed);
  const auto k = train_size(instances.size(), train_frac);
  std::vector<bool> in_train(instances.size(), false);
  for (std::size_t i = 0; i < k; ++i) in_train[order[i]] = true;
  Split s;
  for (std::size_t i = 0; i < instances.size(); ++i) (in_train[i] ? s.train : s.test).push_back(instances[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Predictions and scoring

using Predictions = std::map<std::string, std::vector<std::string>>;

/// `instance_id<TAB>sub1<TAB>sub2...`
inline Predictions parse_predictions(std::string_view content, const std::string& origin = "predictions") {
  Predictions p;
  const auto lines = util::split(content, '\n');
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (util::trim_view(line).empty() || line[0] == '#') continue;
    const auto where = origin + ":" + std::to_string(i + 1);
    const auto f = util::split(line, '\t');
    std::vector<std::string> subs;
    for (std::size_t k = 1; k < f.size(); ++k)
      if (!util::trim_view(f[k]).empty()) subs.push_back(util::trim(f[k]));
    if (subs.empty()) throw Error("eval.bad_predictions", where + ": prediction needs at least one substitute");
    if (!p.emplace(util::trim(f[0]), std::move(subs)).second)
      throw Error("eval.bad_predictions", where + ": duplicate instance id " + f[0]);
  }
  return p;
}

inline Predictions load_predictions(const std::string& path) { return parse_predictions(util::read_file(path), path); }

inline std::string predictions_to_string(const Predictions& p) {
  std::string out;
  for (const auto& [id, subs] : p) out += id + "\t" + util::join(subs, "\t") + "\n";
  return out;
}

struct InstanceScore {
  std::string id;
  bool predicted = false;
  std::array<bool, 3> hit{};  // hit[k-1]: gold rank 1 within top k
  bool valid = false;
  friend bool operator==(const InstanceScore&, const InstanceScore&) = default;
};

struct EvalResult {
  std::size_t n = 0;
  double accuracy = 0;
  double validity = 0;
  double acc_at_2 = 0;
  double acc_at_3 = 0;
  std::string side = "all";
  std::vector<InstanceScore> per_instance;
};

/// Whether gold rank 1 is among the first k predictions.
inline bool hit_at(const std::vector<std::string>& pred, const std::string& gold1, std::size_t k) {
  if (k < 1) throw Error("eval.bad_k", "k must be at least 1");
  const auto g = normalize_surface(gold1);
  for (std::size_t i = 0; i < pred.size() && i < k; ++i)
    if (normalize_surface(pred[i]) == g) return true;
  return false;
}

inline bool simpler(const Lexicon& lex, std::string_view candidate, std::string_view original) {
  const auto c = lex.lookup(normalize_surface(candidate));
  const auto o = lex.lookup(normalize_surface(original));
  return c && o && c->aoa < o->aoa;
}

inline EvalResult summarize_scores(std::vector<InstanceScore> per_instance, std::string side = "all") {
  EvalResult r;
  r.n = per_instance.size();
  r.side = std::move(side);
  if (r.n == 0) throw Error("eval.empty", "no instances to score");
  std::size_t h1 = 0, h2 = 0, h3 = 0, v = 0;
  for (const auto& s : per_instance) {
    h1 += s.hit[0];
    h2 += s.hit[1];
    h3 += s.hit[2];
    v += s.valid;
  }
  const double n = static_cast<double>(r.n);
  r.accuracy = static_cast<double>(h1) / n;
  r.acc_at_2 = static_cast<double>(h2) / n;
  r.acc_at_3 = static_cast<double>(h3) / n;
  r.validity = static_cast<double>(v) / n;
  r.per_instance = std::move(per_instance);
  return r;
}

inline EvalResult score(const std::vector<SimplificationInstance>& instances, const Predictions& preds,
                        const Lexicon& lex, std::string side = "all") {
  std::vector<InstanceScore> per;
  for (const auto& inst : instances) {
    InstanceScore s;
    s.id = inst.id;
    const auto it = preds.find(inst.id);
    if (it != preds.end() && !it->second.empty()) {
      s.predicted = true;
      for (std::size_t k = 1; k <= 3; ++k) s.hit[k - 1] = hit_at(it->second, inst.gold.front(), k);
      s.valid = simpler(lex, it->second.front(), inst.complex_word);
    }
    per.push_back(std::move(s));
  }
  return summarize_scores(std::move(per), std::move(side));
}

inline Predictions gold_as_predictions(const std::vector<SimplificationInstance>& instances) {
  Predictions p;
  for (const auto& i : instances) p[i.id] = i.gold;
  return p;
}

/// Ranked survivors of the built-in candidate pipeline for each instance.
inline Predictions pipeline_predictions(const std::vector<SimplificationInstance>& instances, const Lexicon& lex,
                                        const std::vector<CandidateBackend*>& backends, const WordTable& antonyms,
                                        std::size_t k = 3) {
  Predictions p;
  for (const auto& inst : instances) {
    auto span = locate_word(inst.sentence, inst.complex_word);
    if (!span) continue;
    const auto hit = lex.lookup(normalize_surface(inst.complex_word));
    if (!hit) continue;  // original AoA unknown: nothing can be certified simpler
    span->aoa = hit->aoa;
    const auto list = postfilter(generate_candidates(*span, backends, k), *span, lex, antonyms);
    std::vector<std::string> ranked;
    for (const auto& c : list.candidates) ranked.push_back(c.word);
    if (!ranked.empty()) p[inst.id] = std::move(ranked);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Report

struct NamedResult {
  std::string system;
  EvalResult result;
};

inline std::vector<std::string> report_columns() { return {"Accuracy", "Validity", "Accuracy@2", "Accuracy@3"}; }

inline std::array<double, 4> report_values(const EvalResult& r) {
  return {r.accuracy, r.validity, r.acc_at_2, r.acc_at_3};
}

/// Rendered cells (3 decimals) with best-per-column flags; ties on the rendered value are all marked.
struct ReportTable {
  std::vector<std::string> systems;
  std::vector<std::array<std::string, 4>> cells;
  std::vector<std::array<bool, 4>> best;
  std::vector<std::size_t> n;
  std::vector<std::string> sides;
};

inline ReportTable build_report(const std::vector<NamedResult>& results) {
  ReportTable t;
  for (const auto& r : results) {
    t.systems.push_back(r.system);
    std::array<std::string, 4> c;
    const auto v = report_values(r.result);
    for (int i = 0; i < 4; ++i) c[i] = util::fixed(v[i], 3);
    t.cells.push_back(c);
    t.n.push_back(r.result.n);
    t.sides.push_back(r.result.side);
  }
  t.best.assign(results.size(), {});
  for (int col = 0; col < 4; ++col) {
    std::optional<double> top;
    for (const auto& c : t.cells) {
      const double v = std::stod(c[col]);
      if (!top || v > *top) top = v;
    }
    for (std::size_t row = 0; row < t.cells.size(); ++row) t.best[row][col] = std::stod(t.cells[row][col]) == *top;
  }
  return t;
}

/// format: "table" (best values starred), "csv" or "jsonl".
inline std::string render_report(const std::vector<NamedResult>& results, std::string_view format = "table") {
  const auto t = build_report(results);
  if (format == "jsonl") {
    std::string out;
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i].result;
      out += json{{"system", t.systems[i]}, {"accuracy", r.accuracy}, {"validity", r.validity},
                  {"acc_at_2", r.acc_at_2}, {"acc_at_3", r.acc_at_3}, {"n", r.n}, {"side", r.side}}
                 .dump() +
             "\n";
    }
    return out;
  }
  std::vector<std::string> header = {"System"};
  for (const auto& c : report_columns()) header.push_back(c);
  header.push_back("n");
  header.push_back("Side");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < t.systems.size(); ++i) {
    std::vector<std::string> row = {t.systems[i]};
    for (int c = 0; c < 4; ++c) row.push_back(format == "table" && t.best[i][c] ? t.cells[i][c] + "*" : t.cells[i][c]);
    row.push_back(std::to_string(t.n[i]));
    row.push_back(t.sides[i]);
    rows.push_back(std::move(row));
  }
  if (format == "csv") return render_csv(header, rows);
  if (format != "table") throw Error("cli.bad_format", "unknown format: " + std::string(format));
  return render_text_table(header, rows) + "* best in column; accuracy counts gold rank 1 only\n";
}

}  // namespace kidlex

#endif  // KIDLEX_EVALHARNESS_HPP
