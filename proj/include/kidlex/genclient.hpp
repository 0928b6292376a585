#ifndef KIDLEX_GENCLIENT_HPP
#define KIDLEX_GENCLIENT_HPP

// Story prompts, text-generation backends and batch generation.
//
// Backends speak a chat-completions style protocol: POST {endpoint}/chat/completions
// with a bearer token read from an environment variable. The token is held in
// memory only. The mock backend replays canned responses keyed by the rendered prompt.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "kidlex/audit.hpp"
#include "kidlex/util.hpp"

namespace kidlex {

// ---------------------------------------------------------------------------
// Prompts

struct PromptTemplate {
  std::string id;
  std::string pattern;  // "{words}" is replaced by the comma-joined targets
};

inline const std::vector<PromptTemplate>& prompt_templates() {
  static const std::vector<PromptTemplate> t = {
      {"preschool", "Write a story for a preschooler containing the following words: {words}"},
      {"3yo", "Write a story for a 3-year-old containing the following words: {words}"},
      {"4yo", "Write a story for a 4-year-old containing the following words: {words}"},
      {"5yo", "Write a story for a 5-year-old containing the following words: {words}"},
      {"child", "Write a children's story containing the following words: {words}"},
  };
  return t;
}

inline const PromptTemplate& prompt_template(std::string_view id) {
  for (const auto& t : prompt_templates())
    if (t.id == id) return t;
  throw Error("genclient.unknown_prompt", "unknown prompt id: " + std::string(id) +
                                              " (expected preschool, 3yo, 4yo, 5yo or child)");
}

inline std::string render_prompt(const PromptTemplate& tmpl, const std::vector<std::string>& targets) {
  if (targets.size() != 5)
    throw Error("genclient.bad_targets", "expected 5 target words, got " + std::to_string(targets.size()));
  for (const auto& t : targets)
    if (util::trim_view(t).empty()) throw Error("genclient.bad_targets", "empty target word");
  std::string out = tmpl.pattern;
  const auto at = out.find("{words}");
  out.replace(at, 7, util::join(targets, ", "));
  return out;
}

// ---------------------------------------------------------------------------
// Backends

enum class FailureKind { auth, rate_limited, transient, malformed, empty, key_miss, request };

inline std::string_view to_string(FailureKind k) {
  switch (k) {
    case FailureKind::auth: return "auth";
    case FailureKind::rate_limited: return "rate_limited";
    case FailureKind::transient: return "transient";
    case FailureKind::malformed: return "malformed";
    case FailureKind::empty: return "empty";
    case FailureKind::key_miss: return "key_miss";
    case FailureKind::request: return "request";
  }
  return "?";
}

inline bool retryable(FailureKind k) { return k == FailureKind::rate_limited || k == FailureKind::transient; }

class BackendFailure : public Error {
 public:
  BackendFailure(FailureKind kind, std::string message)
      : Error("genclient." + std::string(to_string(kind)), std::move(message)), kind_(kind) {}
  FailureKind kind() const { return kind_; }

 private:
  FailureKind kind_;
};

class TextBackend {
 public:
  virtual ~TextBackend() = default;
  virtual std::string name() const = 0;
  // `sample` distinguishes repeated requests for the same prompt.
  virtual std::string complete(const std::string& prompt, std::size_t sample) = 0;
  virtual json params() const { return json::object(); }
  virtual bool deterministic() const { return false; }
};

struct BackendConfig {
  std::string name = "backend";
  std::string kind = "http";  // http | mock
  std::string endpoint;       // base URL, e.g. https://api.example.com/v1
  std::string model;
  std::string token_env;      // name of the environment variable holding the bearer token
  double temperature = 1.0;
  int max_tokens = 1024;
  int timeout_s = 120;
  int max_retries = 3;
  double backoff_base_s = 1.0;
  double min_interval_s = 0.0;  // spacing between request starts
  std::string replay;           // mock: corpus or prompt table to replay
};

inline BackendConfig backend_config_from_json(const json& j) {
  BackendConfig c;
  c.name = j.value("name", c.name);
  c.kind = j.value("kind", c.kind);
  c.endpoint = j.value("endpoint", c.endpoint);
  c.model = j.value("model", c.model);
  c.token_env = j.value("token_env", c.token_env);
  c.temperature = j.value("temperature", c.temperature);
  c.max_tokens = j.value("max_tokens", c.max_tokens);
  c.timeout_s = j.value("timeout_s", c.timeout_s);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.backoff_base_s = j.value("backoff_base_s", c.backoff_base_s);
  c.min_interval_s = j.value("min_interval_s", c.min_interval_s);
  c.replay = j.value("replay", c.replay);
  if (c.kind != "http" && c.kind != "mock") throw Error("genclient.bad_config", "backend kind must be http or mock");
  if (c.max_retries < 0 || c.temperature < 0 || c.max_tokens <= 0)
    throw Error("genclient.bad_config", "invalid sampling or retry parameters");
  return c;
}

inline BackendConfig load_backend_config(const std::string& path) {
  try {
    return backend_config_from_json(json::parse(util::read_file(path)));
  } catch (const json::exception& e) {
    throw Error("genclient.bad_config", path + ": " + e.what());
  }
}

struct ParsedUrl {
  std::string scheme_host_port;  // "https://host:443"
  std::string path_prefix;       // "/v1" (no trailing slash)
};

inline ParsedUrl parse_endpoint(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw Error("genclient.bad_url", "endpoint needs a scheme: " + std::string(url));
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw Error("genclient.bad_url", "unsupported scheme: " + std::string(scheme));
  const auto host_start = scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  ParsedUrl p;
  p.scheme_host_port = std::string(url.substr(0, path_start));
  if (p.scheme_host_port.size() <= host_start) throw Error("genclient.bad_url", "endpoint has no host");
  p.path_prefix = path_start == std::string_view::npos ? "" : std::string(url.substr(path_start));
  while (!p.path_prefix.empty() && p.path_prefix.back() == '/') p.path_prefix.pop_back();
  return p;
}

class HttpChatBackend : public TextBackend {
 public:
  explicit HttpChatBackend(BackendConfig cfg) : cfg_(std::move(cfg)), url_(parse_endpoint(cfg_.endpoint)) {
    if (!cfg_.token_env.empty()) {
      const char* v = std::getenv(cfg_.token_env.c_str());
      if (!v || !*v) throw BackendFailure(FailureKind::auth, "environment variable " + cfg_.token_env + " is not set");
      token_ = v;
    }
  }

  std::string name() const override { return cfg_.name; }

  json params() const override {
    return {{"model", cfg_.model}, {"temperature", cfg_.temperature}, {"max_tokens", cfg_.max_tokens}};
  }

  std::string complete(const std::string& prompt, std::size_t) override {
    pace();
    httplib::Client cli(url_.scheme_host_port);
    cli.set_connection_timeout(std::chrono::seconds(std::min(cfg_.timeout_s, 30)));
    cli.set_read_timeout(std::chrono::seconds(cfg_.timeout_s));
    if (!token_.empty()) cli.set_bearer_token_auth(token_);
    json body = {{"model", cfg_.model},
                 {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
                 {"temperature", cfg_.temperature},
                 {"max_tokens", cfg_.max_tokens}};
    const auto res = cli.Post(url_.path_prefix + "/chat/completions", body.dump(), "application/json");
    if (!res) throw BackendFailure(FailureKind::transient, "connection failed: " + httplib::to_string(res.error()));
    const int st = res->status;
    if (st == 401 || st == 403) throw BackendFailure(FailureKind::auth, "authentication rejected (HTTP " + std::to_string(st) + ")");
    if (st == 429) throw BackendFailure(FailureKind::rate_limited, "rate limited (HTTP 429)");
    if (st >= 500) throw BackendFailure(FailureKind::transient, "server error (HTTP " + std::to_string(st) + ")");
    if (st < 200 || st >= 300) throw BackendFailure(FailureKind::request, "request rejected (HTTP " + std::to_string(st) + ")");
    std::string text;
    try {
      const auto j = json::parse(res->body);
      const auto& choice = j.at("choices").at(0);
      if (choice.contains("message"))
        text = choice.at("message").at("content").get<std::string>();
      else
        text = choice.at("text").get<std::string>();
    } catch (const json::exception& e) {
      throw BackendFailure(FailureKind::malformed, std::string("malformed response: ") + e.what());
    }
    if (util::trim_view(text).empty()) throw BackendFailure(FailureKind::empty, "empty completion");
    return util::trim(text);
  }

 private:
  void pace() {
    if (cfg_.min_interval_s <= 0) return;
    std::unique_lock lock(pace_mu_);
    const auto now = std::chrono::steady_clock::now();
    const auto gap = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(cfg_.min_interval_s));
    if (next_start_ > now) std::this_thread::sleep_until(next_start_);
    next_start_ = std::max(now, next_start_) + gap;
  }

  BackendConfig cfg_;
  ParsedUrl url_;
  std::string token_;
  std::mutex pace_mu_;
  std::chrono::steady_clock::time_point next_start_{};
};

/// Replays canned responses: the n-th request for a prompt returns its n-th response.
class MockBackend : public TextBackend {
 public:
  explicit MockBackend(std::string name = "mock") : name_(std::move(name)) {}

  void add(const std::string& prompt, std::string response) { table_[prompt].push_back(std::move(response)); }

  static MockBackend from_corpus(const std::vector<StoryRecord>& stories, std::string name = "mock") {
    MockBackend m(std::move(name));
    for (const auto& s : stories) m.add(render_prompt(prompt_template(s.prompt_id), s.target_words), s.text);
    return m;
  }

  /// Line-delimited records `{"prompt": ..., "response": ...}`.
  static MockBackend from_table(const std::string& path, std::string name = "mock") {
    MockBackend m(std::move(name));
    const auto lines = util::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (util::trim_view(lines[i]).empty()) continue;
      try {
        const auto j = json::parse(lines[i]);
        m.add(j.at("prompt").get<std::string>(), j.at("response").get<std::string>());
      } catch (const json::exception& e) {
        throw Error("genclient.bad_replay", path + ":" + std::to_string(i + 1) + ": " + e.what());
      }
    }
    return m;
  }

  std::string name() const override { return name_; }
  bool deterministic() const override { return true; }
  json params() const override { return {{"replay", true}}; }

  std::string complete(const std::string& prompt, std::size_t sample) override {
    const auto it = table_.find(prompt);
    if (it == table_.end() || sample >= it->second.size())
      throw BackendFailure(FailureKind::key_miss, "no canned response for prompt: " + prompt);
    if (util::trim_view(it->second[sample]).empty()) throw BackendFailure(FailureKind::empty, "empty completion");
    return it->second[sample];
  }

  std::size_t size() const { return table_.size(); }

 private:
  std::string name_;
  std::map<std::string, std::vector<std::string>> table_;
};

inline std::unique_ptr<TextBackend> make_backend(const BackendConfig& cfg) {
  if (cfg.kind == "mock") {
    if (cfg.replay.empty()) throw Error("genclient.bad_config", "mock backend needs a replay file");
    const auto content = util::read_file(cfg.replay);
    const auto first = content.find_first_not_of(" \t\r\n");
    // Story corpora carry "text"; prompt tables carry "response".
    const bool corpus = first != std::string::npos &&
                        json::parse(content.substr(first, content.find('\n', first) - first)).contains("text");
    return std::make_unique<MockBackend>(corpus ? MockBackend::from_corpus(load_corpus(cfg.replay), cfg.name)
                                                : MockBackend::from_table(cfg.replay, cfg.name));
  }
  return std::make_unique<HttpChatBackend>(cfg);
}

// ---------------------------------------------------------------------------
// Retry and batch generation

struct RetryPolicy {
  int max_retries = 3;
  double backoff_base_s = 1.0;
  std::function<void(double)> sleep = [](double s) {
    std::this_thread::sleep_for(std::chrono::duration<double>(s));
  };
};

struct CallOutcome {
  std::optional<std::string> text;
  int retries = 0;
  std::optional<FailureKind> failure;
  std::string message;
};

inline CallOutcome call_with_retry(TextBackend& backend, const std::string& prompt, std::size_t sample,
                                   const RetryPolicy& policy) {
  CallOutcome out;
  for (int attempt = 0;; ++attempt) {
    try {
      out.text = backend.complete(prompt, sample);
      out.failure.reset();
      out.message.clear();
      return out;
    } catch (const BackendFailure& f) {
      out.failure = f.kind();
      out.message = f.what();
      if (!retryable(f.kind()) || attempt >= policy.max_retries) return out;
      ++out.retries;
      policy.sleep(policy.backoff_base_s * static_cast<double>(1u << attempt));
    }
  }
}

struct GenerationFailure {
  std::size_t set_index = 0;
  std::size_t sample = 0;
  std::string kind;
  std::string message;
  int retries = 0;
};

struct BatchResult {
  std::vector<StoryRecord> records;
  std::vector<GenerationFailure> failures;
};

struct BatchOptions {
  std::size_t n_per_set = 1;
  unsigned jobs = 4;
  std::string model_label;  // defaults to the backend name
  RetryPolicy retry;
  // Receives records in request order as soon as all earlier requests are settled.
  std::function<void(const StoryRecord&)> sink;
};

inline std::string story_id(std::string_view model, std::string_view prompt_id, std::size_t set, std::size_t sample) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu-%02zu", set, sample);
  return std::string(model) + "-" + std::string(prompt_id) + "-" + buf;
}

inline std::string utc_timestamp() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// One request per (target set, sample). An authentication failure stops the
/// batch and is rethrown after in-flight requests settle.
inline BatchResult generate_batch(TextBackend& backend, const PromptTemplate& tmpl,
                                  const std::vector<std::vector<std::string>>& target_sets,
                                  const BatchOptions& opts = {}) {
  struct Job {
    std::size_t set, sample;
    std::string prompt;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < target_sets.size(); ++s) {
    const auto prompt = render_prompt(tmpl, target_sets[s]);
    for (std::size_t k = 0; k < opts.n_per_set; ++k) jobs.push_back({s, k, prompt});
  }
  const std::string model = opts.model_label.empty() ? backend.name() : opts.model_label;

  std::vector<std::optional<StoryRecord>> done(jobs.size());
  std::vector<std::optional<GenerationFailure>> failed(jobs.size());
  std::vector<bool> settled(jobs.size(), false);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::size_t emitted = 0;
  std::optional<std::string> auth_error;

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size() || stop) return;
      const auto& job = jobs[i];
      const auto outcome = call_with_retry(backend, job.prompt, job.sample, opts.retry);
      std::lock_guard lock(mu);
      if (outcome.text) {
        StoryRecord r;
        r.id = story_id(model, tmpl.id, job.set, job.sample);
        r.model = model;
        r.prompt_id = tmpl.id;
        r.target_words = target_sets[job.set];
        r.text = *outcome.text;
        r.meta = {{"backend", backend.name()}, {"params", backend.params()}, {"retries", outcome.retries},
                  {"prompt", job.prompt}};
        if (!backend.deterministic()) r.meta["timestamp"] = utc_timestamp();
        done[i] = std::move(r);
      } else {
        failed[i] = GenerationFailure{job.set, job.sample, std::string(to_string(*outcome.failure)), outcome.message,
                                      outcome.retries};
        if (*outcome.failure == FailureKind::auth) {
          stop = true;
          if (!auth_error) auth_error = outcome.message;
        }
      }
      settled[i] = true;
      while (emitted < jobs.size() && settled[emitted]) {
        if (done[emitted] && opts.sink) opts.sink(*done[emitted]);
        ++emitted;
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1))));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (auth_error) throw BackendFailure(FailureKind::auth, *auth_error);

  BatchResult result;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (done[i]) result.records.push_back(std::move(*done[i]));
    if (failed[i]) result.failures.push_back(std::move(*failed[i]));
  }
  return result;
}

/// Appends each record to `path` as it is emitted; the file is truncated first.
class CorpusWriter {
 public:
  explicit CorpusWriter(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error("io.write_failed", "cannot open " + path);
  }
  void operator()(const StoryRecord& r) {
    std::lock_guard lock(mu_);
    out_ << story_to_line(r) << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
  std::mutex mu_;
};

}  // namespace kidlex

#endif  // KIDLEX_GENCLIENT_HPP
