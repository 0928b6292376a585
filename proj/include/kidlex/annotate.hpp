#ifndef KIDLEX_ANNOTATE_HPP
#define KIDLEX_ANNOTATE_HPP

// Annotation workflow for building a child-directed simplification dataset.
//
//   open --propose(valid)--> proposed --accept--> under_review --accept--> accepted
//     ^   propose(invalid) keeps the task open      |                  any reject --> rejected
//     +--------- withdraw (before any review) ------+
//
// accepted and rejected are terminal. Every state change is appended to an
// event log (one JSON object per line) and the store is rebuilt by replaying it.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kidlex/audit.hpp"
#include "kidlex/evalharness.hpp"
#include "kidlex/lexicon.hpp"
#include "kidlex/simplify.hpp"

namespace kidlex {

enum class TaskStatus { open, proposed, under_review, accepted, rejected };

inline std::string_view to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::open: return "open";
    case TaskStatus::proposed: return "proposed";
    case TaskStatus::under_review: return "under_review";
    case TaskStatus::accepted: return "accepted";
    case TaskStatus::rejected: return "rejected";
  }
  return "?";
}

inline bool terminal(TaskStatus s) { return s == TaskStatus::accepted || s == TaskStatus::rejected; }

struct TaskInstance {
  std::string story_id;
  ComplexSpan span;
};

struct Proposal {
  std::string synonym;
  std::string annotator;
  bool auto_validity = false;
  std::optional<double> aoa;
};

struct Review {
  std::string reviewer;
  bool accept = false;
  std::string note;
};

struct AnnotationTask {
  std::string id;
  TaskInstance instance;
  TaskStatus status = TaskStatus::open;
  std::optional<Proposal> proposal;
  std::vector<Review> reviews;
  std::size_t attempts = 0;  // proposals made, valid or not
  std::uint64_t version = 0;
};

struct ValidityCheck {
  std::string synonym;
  std::optional<double> aoa;
  double original_aoa = 0;
  bool valid = false;
};

struct StoreStats {
  std::size_t total = 0;
  std::map<std::string, std::size_t> by_status;
  std::size_t invalid_attempts = 0;
};

class AnnotationStore {
 public:
  using Clock = std::function<std::string()>;

  /// `log_path` empty keeps everything in memory.
  AnnotationStore(const Lexicon& lex, std::string log_path = "", Clock clock = nullptr)
      : lex_(lex), log_path_(std::move(log_path)), clock_(std::move(clock)) {
    if (!log_path_.empty() && std::filesystem::exists(log_path_)) replay();
  }

  static std::string log_path_for(const std::string& state_dir) {
    std::filesystem::create_directories(state_dir);
    return (std::filesystem::path(state_dir) / "events.jsonl").string();
  }

  std::vector<std::string> enqueue(const std::vector<TaskInstance>& items, std::uint64_t seed) {
    std::lock_guard lock(mu_);
    if (items.empty()) throw Error("annotate.empty_enqueue", "nothing to enqueue");
    std::set<std::string> batch_keys;
    for (const auto& it : items) {
      const auto key = span_key(it);
      if (keys_.contains(key) || !batch_keys.insert(key).second)
        throw Error("annotate.duplicate_span", "span already queued: " + it.story_id + "@" +
                                                   std::to_string(it.span.doc_span.begin) + " " + it.span.word);
    }
    json tasks = json::array();
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < items.size(); ++i) {
      ids.push_back(next_id(order_.size() + i));
      tasks.push_back(instance_to_json(ids.back(), items[i]));
    }
    json ev = {{"type", "enqueue"}, {"seed", seed}, {"tasks", tasks}};
    apply(ev);
    persist(ev);
    return ids;
  }

  ValidityCheck check(const std::string& task_id, const std::string& synonym) const {
    std::lock_guard lock(mu_);
    return check_locked(get_locked(task_id), synonym);
  }

  /// Returns the task after the proposal; an invalid synonym is recorded but leaves the task open.
  std::pair<AnnotationTask, ValidityCheck> propose(const std::string& task_id, const std::string& annotator,
                                                   const std::string& synonym,
                                                   std::optional<std::uint64_t> version = std::nullopt) {
    std::lock_guard lock(mu_);
    auto& t = get_locked(task_id);
    check_version(t, version);
    if (annotator.empty()) throw Error("annotate.bad_request", "annotator id required");
    if (t.status != TaskStatus::open)
      throw Error("annotate.bad_state", "task " + task_id + " is " + std::string(to_string(t.status)) + ", not open");
    const auto syn = util::trim(synonym);
    if (syn.empty()) throw Error("annotate.bad_request", "synonym required");
    if (normalize_surface(syn) == normalize_surface(t.instance.span.word))
      throw Error("annotate.same_word", "synonym equals the original word");
    const auto v = check_locked(t, syn);
    json ev = {{"type", "propose"}, {"task", task_id}, {"annotator", annotator}, {"synonym", syn},
               {"auto_validity", v.valid}};
    ev["aoa"] = v.aoa ? json(*v.aoa) : json(nullptr);
    apply(ev);
    persist(ev);
    return {t, v};
  }

  AnnotationTask review(const std::string& task_id, const std::string& reviewer, bool accept, const std::string& note,
                        std::optional<std::uint64_t> version = std::nullopt) {
    std::lock_guard lock(mu_);
    auto& t = get_locked(task_id);
    check_version(t, version);
    if (reviewer.empty()) throw Error("annotate.bad_request", "reviewer id required");
    if (t.status != TaskStatus::proposed && t.status != TaskStatus::under_review)
      throw Error("annotate.bad_state", "task " + task_id + " is " + std::string(to_string(t.status)) +
                                            ", not awaiting review");
    if (reviewer == t.proposal->annotator) throw Error("annotate.self_review", "annotators cannot review their own proposal");
    for (const auto& r : t.reviews)
      if (r.reviewer == reviewer) throw Error("annotate.double_review", reviewer + " already reviewed " + task_id);
    json ev = {{"type", "review"}, {"task", task_id}, {"reviewer", reviewer}, {"accept", accept}, {"note", note}};
    apply(ev);
    persist(ev);
    return t;
  }

  AnnotationTask withdraw(const std::string& task_id, const std::string& annotator,
                          std::optional<std::uint64_t> version = std::nullopt) {
    std::lock_guard lock(mu_);
    auto& t = get_locked(task_id);
    check_version(t, version);
    if (t.status != TaskStatus::proposed || !t.reviews.empty())
      throw Error("annotate.bad_state", "only an unreviewed proposal can be withdrawn");
    if (t.proposal->annotator != annotator)
      throw Error("annotate.forbidden", "only the proposing annotator can withdraw");
    json ev = {{"type", "withdraw"}, {"task", task_id}, {"annotator", annotator}};
    apply(ev);
    persist(ev);
    return t;
  }

  AnnotationTask get(const std::string& task_id) const {
    std::lock_guard lock(mu_);
    return get_locked(task_id);
  }

  /// Next open task in presentation order, or for reviewers the next task awaiting a review they may give.
  std::optional<AnnotationTask> next_for(const std::string& user, bool reviewer) const {
    std::lock_guard lock(mu_);
    for (const auto& id : order_) {
      const auto& t = tasks_.at(id);
      if (!reviewer) {
        if (t.status == TaskStatus::open) return t;
        continue;
      }
      if (t.status != TaskStatus::proposed && t.status != TaskStatus::under_review) continue;
      if (t.proposal->annotator == user) continue;
      if (std::any_of(t.reviews.begin(), t.reviews.end(), [&](const Review& r) { return r.reviewer == user; }))
        continue;
      return t;
    }
    return std::nullopt;
  }

  std::vector<AnnotationTask> tasks() const {
    std::lock_guard lock(mu_);
    std::vector<AnnotationTask> out;
    for (const auto& id : order_) out.push_back(tasks_.at(id));
    return out;
  }

  StoreStats stats() const {
    std::lock_guard lock(mu_);
    StoreStats s;
    s.total = tasks_.size();
    for (auto st : {TaskStatus::open, TaskStatus::proposed, TaskStatus::under_review, TaskStatus::accepted,
                    TaskStatus::rejected})
      s.by_status[std::string(to_string(st))] = 0;
    for (const auto& [_, t] : tasks_) ++s.by_status[std::string(to_string(t.status))];
    s.invalid_attempts = invalid_attempts_;
    return s;
  }

  /// Accepted tasks as CDS instances, ordered by (story id, span offset).
  std::vector<SimplificationInstance> export_instances() const {
    std::lock_guard lock(mu_);
    std::vector<SimplificationInstance> out;
    for (const auto& [id, t] : tasks_) {
      if (t.status != TaskStatus::accepted) continue;
      out.push_back({id, t.instance.story_id, t.instance.span.doc_span.begin, t.instance.span.sentence,
                     t.instance.span.word, {t.proposal->synonym}});
    }
    if (out.empty()) throw Error("annotate.nothing_accepted", "no accepted tasks to export");
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      if (a.story_id != b.story_id) return a.story_id < b.story_id;
      if (a.span_start != b.span_start) return a.span_start < b.span_start;
      return a.id < b.id;
    });
    return out;
  }

  std::string export_cds() const { return dataset_to_cds(export_instances()); }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return tasks_.size();
  }

 private:
  static std::string next_id(std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "t%05zu", n + 1);
    return buf;
  }

  static std::string span_key(const TaskInstance& it) {
    return it.story_id + "\x1f" + std::to_string(it.span.doc_span.begin) + "\x1f" + normalize_surface(it.span.word);
  }

  static json instance_to_json(const std::string& id, const TaskInstance& it) {
    const auto& s = it.span;
    return {{"id", id},
            {"story_id", it.story_id},
            {"sentence_idx", s.sentence_idx},
            {"sentence", s.sentence},
            {"word", s.word},
            {"span", {s.span.begin, s.span.end}},
            {"doc_span", {s.doc_span.begin, s.doc_span.end}},
            {"aoa", s.aoa}};
  }

  static TaskInstance instance_from_json(const json& j) {
    TaskInstance it;
    it.story_id = j.at("story_id").get<std::string>();
    auto& s = it.span;
    s.sentence_idx = j.at("sentence_idx").get<std::size_t>();
    s.sentence = j.at("sentence").get<std::string>();
    s.word = j.at("word").get<std::string>();
    s.span = {j.at("span").at(0).get<std::size_t>(), j.at("span").at(1).get<std::size_t>()};
    s.doc_span = {j.at("doc_span").at(0).get<std::size_t>(), j.at("doc_span").at(1).get<std::size_t>()};
    s.aoa = j.at("aoa").get<double>();
    return it;
  }

  AnnotationTask& get_locked(const std::string& id) {
    const auto it = tasks_.find(id);
    if (it == tasks_.end()) throw Error("annotate.unknown_task", "unknown task " + id);
    return it->second;
  }
  const AnnotationTask& get_locked(const std::string& id) const {
    return const_cast<AnnotationStore*>(this)->get_locked(id);
  }

  static void check_version(const AnnotationTask& t, std::optional<std::uint64_t> version) {
    if (version && *version != t.version)
      throw Error("annotate.stale_version", "task " + t.id + " is at version " + std::to_string(t.version) +
                                                ", request was made against " + std::to_string(*version));
  }

  ValidityCheck check_locked(const AnnotationTask& t, const std::string& synonym) const {
    ValidityCheck v;
    v.synonym = util::trim(synonym);
    v.original_aoa = t.instance.span.aoa;
    if (const auto hit = lex_.lookup(normalize_surface(v.synonym))) v.aoa = hit->aoa;
    v.valid = v.aoa && *v.aoa < v.original_aoa && normalize_surface(v.synonym) != normalize_surface(t.instance.span.word);
    return v;
  }

  // Applies an already-validated event; shared by live calls and replay.
  void apply(const json& ev) {
    const auto type = ev.at("type").get<std::string>();
    if (type == "enqueue") {
      std::vector<std::string> ids;
      for (const auto& j : ev.at("tasks")) {
        AnnotationTask t;
        t.id = j.at("id").get<std::string>();
        t.instance = instance_from_json(j);
        keys_.insert(span_key(t.instance));
        ids.push_back(t.id);
        tasks_.emplace(t.id, std::move(t));
      }
      util::seeded_shuffle(ids, ev.at("seed").get<std::uint64_t>());
      order_.insert(order_.end(), ids.begin(), ids.end());
      return;
    }
    auto& t = get_locked(ev.at("task").get<std::string>());
    ++t.version;
    if (type == "propose") {
      ++t.attempts;
      Proposal p{ev.at("synonym").get<std::string>(), ev.at("annotator").get<std::string>(),
                 ev.at("auto_validity").get<bool>(), std::nullopt};
      if (!ev.at("aoa").is_null()) p.aoa = ev.at("aoa").get<double>();
      if (p.auto_validity) {
        t.proposal = std::move(p);
        t.status = TaskStatus::proposed;
      } else {
        ++invalid_attempts_;
      }
    } else if (type == "review") {
      t.reviews.push_back({ev.at("reviewer").get<std::string>(), ev.at("accept").get<bool>(),
                           ev.value("note", std::string())});
      if (!t.reviews.back().accept) {
        t.status = TaskStatus::rejected;
      } else {
        const auto accepts = std::count_if(t.reviews.begin(), t.reviews.end(), [](const Review& r) { return r.accept; });
        t.status = accepts >= 2 ? TaskStatus::accepted : TaskStatus::under_review;
      }
    } else if (type == "withdraw") {
      t.proposal.reset();
      t.status = TaskStatus::open;
    } else {
      throw Error("annotate.bad_log", "unknown event type " + type);
    }
  }

  void persist(json ev) {
    if (log_path_.empty()) return;
    ev["seq"] = ++seq_;
    if (clock_) ev["at"] = clock_();
    std::ofstream out(log_path_, std::ios::app | std::ios::binary);
    out << ev.dump() << '\n';
    out.flush();
    if (!out) throw Error("io.write_failed", "cannot append to " + log_path_);
  }

  void replay() {
    const auto lines = util::read_lines(log_path_);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (util::trim_view(lines[i]).empty()) continue;
      try {
        const auto ev = json::parse(lines[i]);
        apply(ev);
        seq_ = std::max<std::uint64_t>(seq_, ev.value("seq", seq_ + 1));
      } catch (const json::exception& e) {
        throw Error("annotate.bad_log", log_path_ + ":" + std::to_string(i + 1) + ": " + e.what());
      }
    }
  }

  const Lexicon& lex_;
  std::string log_path_;
  Clock clock_;
  mutable std::mutex mu_;
  std::map<std::string, AnnotationTask> tasks_;
  std::vector<std::string> order_;
  std::set<std::string> keys_;
  std::size_t invalid_attempts_ = 0;
  std::uint64_t seq_ = 0;
};

inline json task_to_json(const AnnotationTask& t) {
  const auto& s = t.instance.span;
  json j = {{"id", t.id},
            {"story_id", t.instance.story_id},
            {"sentence", s.sentence},
            {"word", s.word},
            {"span", {s.span.begin, s.span.end}},
            {"doc_offset", s.doc_span.begin},
            {"aoa", s.aoa},
            {"status", to_string(t.status)},
            {"version", t.version},
            {"attempts", t.attempts}};
  if (t.proposal) {
    j["proposal"] = {{"synonym", t.proposal->synonym},
                     {"annotator", t.proposal->annotator},
                     {"auto_validity", t.proposal->auto_validity}};
    j["proposal"]["aoa"] = t.proposal->aoa ? json(*t.proposal->aoa) : json(nullptr);
  } else {
    j["proposal"] = nullptr;
  }
  json reviews = json::array();
  for (const auto& r : t.reviews)
    reviews.push_back({{"reviewer", r.reviewer}, {"verdict", r.accept ? "accept" : "reject"}, {"note", r.note}});
  j["reviews"] = reviews;
  return j;
}

inline json validity_to_json(const ValidityCheck& v) {
  json j = {{"synonym", v.synonym}, {"original_aoa", v.original_aoa}, {"auto_validity", v.valid}};
  j["aoa"] = v.aoa ? json(*v.aoa) : json(nullptr);
  return j;
}

inline json stats_to_json(const StoreStats& s) {
  return {{"total", s.total}, {"by_status", s.by_status}, {"invalid_attempts", s.invalid_attempts},
          {"accepted", s.by_status.at("accepted")}};
}

/// Complex spans from a corpus (targets exempt), then `limit` of them drawn at random with `seed`.
inline std::vector<TaskInstance> sample_instances(const std::vector<StoryRecord>& stories, const Lexicon& lex,
                                                  const ComplexOptions& opts, std::size_t limit, std::uint64_t seed) {
  std::vector<TaskInstance> all;
  for (const auto& s : stories)
    for (auto& span : identify_complex(tokenize(s.text), lex, s.target_words, opts)) all.push_back({s.id, std::move(span)});
  if (limit && all.size() > limit) {
    util::seeded_shuffle(all, seed);
    all.resize(limit);
    std::sort(all.begin(), all.end(), [](const TaskInstance& a, const TaskInstance& b) {
      if (a.story_id != b.story_id) return a.story_id < b.story_id;
      return a.span.doc_span.begin < b.span.doc_span.begin;
    });
  }
  return all;
}

}  // namespace kidlex

#endif  // KIDLEX_ANNOTATE_HPP
