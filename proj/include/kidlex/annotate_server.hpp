#ifndef KIDLEX_ANNOTATE_SERVER_HPP
#define KIDLEX_ANNOTATE_SERVER_HPP

#include <map>
#include <optional>
#include <string>
#include <thread>

#include <httplib.h>

#include "kidlex/annotate.hpp"

namespace kidlex {

/// token -> user id. Empty map disables authentication.
using TokenTable = std::map<std::string, std::string>;

/// Reads {"tokens": {"<token>": "<user>", ...}}.
inline TokenTable load_token_table(const std::string& path) {
  json j;
  try {
    j = json::parse(util::read_file(path));
  } catch (const json::exception& e) {
    throw Error("annotate.bad_tokens", path + ": " + e.what());
  }
  if (!j.contains("tokens") || !j["tokens"].is_object()) throw Error("annotate.bad_tokens", path + ": missing tokens object");
  TokenTable t;
  for (const auto& [tok, user] : j["tokens"].items()) {
    if (!user.is_string() || tok.empty()) throw Error("annotate.bad_tokens", path + ": bad entry " + tok);
    t[tok] = user.get<std::string>();
  }
  return t;
}

inline int http_status_for(const std::string& code) {
  static const std::map<std::string, int> table = {
      {"annotate.unknown_task", 404},     {"annotate.stale_version", 409}, {"annotate.bad_state", 409},
      {"annotate.double_review", 409},    {"annotate.nothing_accepted", 409},
      {"annotate.self_review", 403},      {"annotate.forbidden", 403},     {"annotate.unauthorized", 401},
      {"annotate.same_word", 422},        {"annotate.bad_request", 400},   {"annotate.duplicate_span", 409},
      {"annotate.empty_enqueue", 400}};
  const auto it = table.find(code);
  return it == table.end() ? 500 : it->second;
}

class AnnotationServer {
 public:
  AnnotationServer(AnnotationStore& store, TokenTable tokens = {}, std::string static_dir = "")
      : store_(store), tokens_(std::move(tokens)) {
    if (!static_dir.empty() && !server_.set_mount_point("/", static_dir))
      throw Error("annotate.bad_static", "no such directory " + static_dir);
    routes();
  }

  ~AnnotationServer() { stop(); }

  /// Binds and serves on a background thread; port 0 picks a free port. Returns the bound port.
  int start(const std::string& host, int port) {
    port_ = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (port_ < 0) throw Error("annotate.bind_failed", "cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  /// Blocking variant for the CLI.
  void serve(const std::string& host, int port) {
    if (!server_.listen(host, port)) throw Error("annotate.bind_failed", "cannot listen on " + host + ":" + std::to_string(port));
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }

 private:
  using Req = httplib::Request;
  using Res = httplib::Response;

  static void send_json(Res& res, const json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  }

  static void send_error(Res& res, const Error& e) {
    send_json(res, {{"error", e.code()}, {"message", e.what()}}, http_status_for(e.code()));
  }

  // Resolves the acting user: with auth on, the bearer token decides and a conflicting body id is refused.
  std::string acting_user(const Req& req, const std::string& claimed) const {
    if (tokens_.empty()) {
      if (claimed.empty()) throw Error("annotate.bad_request", "user id required");
      return claimed;
    }
    const auto header = req.get_header_value("Authorization");
    const std::string prefix = "Bearer ";
    const auto it = header.rfind(prefix, 0) == 0 ? tokens_.find(header.substr(prefix.size())) : tokens_.end();
    if (it == tokens_.end()) throw Error("annotate.unauthorized", "missing or unknown token");
    if (!claimed.empty() && claimed != it->second)
      throw Error("annotate.forbidden", "token belongs to " + it->second + ", not " + claimed);
    return it->second;
  }

  void require_auth(const Req& req) const {
    if (!tokens_.empty()) acting_user(req, "");
  }

  static json body_of(const Req& req) {
    if (req.body.empty()) return json::object();
    try {
      auto j = json::parse(req.body);
      if (!j.is_object()) throw Error("annotate.bad_request", "body must be a JSON object");
      return j;
    } catch (const json::exception& e) {
      throw Error("annotate.bad_request", std::string("malformed JSON: ") + e.what());
    }
  }

  static std::optional<std::uint64_t> version_of(const json& body) {
    if (!body.contains("version") || body["version"].is_null()) return std::nullopt;
    if (!body["version"].is_number_unsigned()) throw Error("annotate.bad_request", "version must be a non-negative integer");
    return body["version"].get<std::uint64_t>();
  }

  static std::string str_field(const json& body, const char* key) {
    if (!body.contains(key)) return "";
    if (!body[key].is_string()) throw Error("annotate.bad_request", std::string(key) + " must be a string");
    return body[key].get<std::string>();
  }

  template <typename F>
  static auto guarded(F f) {
    return [f](const Req& req, Res& res) {
      try {
        f(req, res);
      } catch (const Error& e) {
        send_error(res, e);
      }
    };
  }

  void routes() {
    server_.Get("/tasks/next", guarded([this](const Req& req, Res& res) {
      const auto user = acting_user(req, req.get_param_value("annotator"));
      const bool reviewer = req.get_param_value("role") == "reviewer";
      if (const auto t = store_.next_for(user, reviewer))
        send_json(res, task_to_json(*t));
      else
        res.status = 204;
    }));
    server_.Get(R"(/tasks/([A-Za-z0-9_-]+))", guarded([this](const Req& req, Res& res) {
      require_auth(req);
      send_json(res, task_to_json(store_.get(req.matches[1])));
    }));
    server_.Get(R"(/tasks/([A-Za-z0-9_-]+)/preview)", guarded([this](const Req& req, Res& res) {
      require_auth(req);
      const auto syn = req.get_param_value("synonym");
      if (util::trim(syn).empty()) throw Error("annotate.bad_request", "synonym required");
      send_json(res, validity_to_json(store_.check(req.matches[1], syn)));
    }));
    server_.Post(R"(/tasks/([A-Za-z0-9_-]+)/propose)", guarded([this](const Req& req, Res& res) {
      const auto body = body_of(req);
      const auto user = acting_user(req, str_field(body, "annotator"));
      const auto [task, v] = store_.propose(req.matches[1], user, str_field(body, "synonym"), version_of(body));
      send_json(res, {{"task", task_to_json(task)}, {"validity", validity_to_json(v)}});
    }));
    server_.Post(R"(/tasks/([A-Za-z0-9_-]+)/review)", guarded([this](const Req& req, Res& res) {
      const auto body = body_of(req);
      const auto user = acting_user(req, str_field(body, "reviewer"));
      const auto verdict = str_field(body, "verdict");
      if (verdict != "accept" && verdict != "reject")
        throw Error("annotate.bad_request", "verdict must be accept or reject");
      const auto t = store_.review(req.matches[1], user, verdict == "accept", str_field(body, "note"), version_of(body));
      send_json(res, {{"task", task_to_json(t)}});
    }));
    server_.Post(R"(/tasks/([A-Za-z0-9_-]+)/withdraw)", guarded([this](const Req& req, Res& res) {
      const auto body = body_of(req);
      const auto user = acting_user(req, str_field(body, "annotator"));
      send_json(res, {{"task", task_to_json(store_.withdraw(req.matches[1], user, version_of(body)))}});
    }));
    server_.Get("/export/cds", guarded([this](const Req& req, Res& res) {
      require_auth(req);
      res.set_content(store_.export_cds(), "text/tab-separated-values; charset=utf-8");
    }));
    server_.Get("/stats", guarded([this](const Req& req, Res& res) {
      require_auth(req);
      send_json(res, stats_to_json(store_.stats()));
    }));
  }

  AnnotationStore& store_;
  TokenTable tokens_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace kidlex

#endif  // KIDLEX_ANNOTATE_SERVER_HPP
