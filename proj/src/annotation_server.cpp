#include <atomic>

#include <httplib.h>

#include "typescore/annotation.hpp"
#include "typescore/errors.hpp"

namespace typescore::annotation {
namespace {

constexpr const char* kFallbackIndex = R"html(<!doctype html>
<html><head><meta charset="utf-8"><title>TypeScore annotation</title></head>
<body><p>The annotation UI bundle is not installed. Start the service with
<code>--ui-dir</code> pointing at the built bundle.</p></body></html>
)html";

void send_json(httplib::Response& res, int status, const io::Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

io::Json parse_body(const httplib::Request& req) {
  io::Json body = io::Json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw ParseError("request body must be a JSON object");
  return body;
}

// Maps store errors to HTTP statuses; anything unexpected becomes a 500.
template <class Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const NotQualified& e) {
    send_error(res, 403, "NotQualified", e.what());
  } catch (const NoTasksRemaining& e) {
    send_error(res, 404, "NoTasksRemaining", e.what());
  } catch (const UnknownPair& e) {
    send_error(res, 404, "UnknownPair", e.what());
  } catch (const DuplicateJudgment& e) {
    send_error(res, 409, "DuplicateJudgment", e.what());
  } catch (const StaleTask& e) {
    send_error(res, 409, "StaleTask", e.what());
  } catch (const GoldSetMissing& e) {
    send_error(res, 503, "GoldSetMissing", e.what());
  } catch (const ParseError& e) {
    send_error(res, 400, "BadRequest", e.what());
  } catch (const ValidationError& e) {
    send_error(res, 400, "BadRequest", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "InternalError", e.what());
  }
}

}  // namespace

struct AnnotationServer::Impl {
  Impl(AnnotationStore& s, ServerOptions o) : store(s), options(std::move(o)) {}
  AnnotationStore& store;
  ServerOptions options;
  httplib::Server server;
  std::atomic<int> bound_port{-1};
};

AnnotationServer::AnnotationServer(AnnotationStore& store, ServerOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {
  auto& srv = impl_->server;
  AnnotationStore& st = impl_->store;

  srv.Post(R"(/raters/([^/]+)/qualification)", [&st](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const io::Json body = parse_body(req);
      std::map<std::string, Answer> answers;
      if (body.contains("answers")) {
        if (!body["answers"].is_object()) throw ParseError("'answers' must be an object");
        for (const auto& [item, value] : body["answers"].items()) {
          const auto a = value.is_string() ? meta_eval::parse_answer(value.get<std::string>()) : std::nullopt;
          if (!a) throw ParseError("answer for '" + item + "' must be LEFT, RIGHT or TIE");
          answers[item] = *a;
        }
      }
      send_json(res, 200, rater_to_json(st.qualify_rater(req.matches[1], answers)));
    });
  });

  srv.Get("/tasks/next", [&st](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string rater = req.get_param_value("rater");
      if (rater.empty()) throw ParseError("query parameter 'rater' is required");
      send_json(res, 200, payload_to_json(st.next_task(rater)));
    });
  });

  srv.Post(R"(/tasks/([^/]+)/judgments)", [&st](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const io::Json body = parse_body(req);
      if (!body.contains("rater_id") || !body["rater_id"].is_string()) {
        throw ParseError("'rater_id' is required");
      }
      if (!body.contains("answers") || !body["answers"].is_object()) throw ParseError("'answers' is required");
      std::map<Question, Answer> answers;
      for (const auto& [key, value] : body["answers"].items()) {
        const auto q = meta_eval::parse_question(key);
        const auto a = value.is_string() ? meta_eval::parse_answer(value.get<std::string>()) : std::nullopt;
        if (!q || !a) throw ParseError("bad answer entry '" + key + "'");
        answers[*q] = *a;
      }
      const TaskState state = st.submit_judgment(body["rater_id"].get<std::string>(), req.matches[1], answers);
      send_json(res, 200, state_to_json(state));
    });
  });

  srv.Get("/export", [&st](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      res.set_content(meta_eval::serialize_annotations(st.export_annotations()), "application/x-ndjson");
    });
  });

  const auto& opts = impl_->options;
  if (!opts.images_dir.empty()) srv.set_mount_point("/images", opts.images_dir.string());
  const bool has_ui = !opts.ui_dir.empty() && std::filesystem::exists(opts.ui_dir / "index.html");
  if (has_ui) {
    srv.set_mount_point("/", opts.ui_dir.string());
  } else {
    srv.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kFallbackIndex, "text/html; charset=utf-8");
    });
  }
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind() {
  auto& impl = *impl_;
  int port = impl.options.port;
  if (port == 0) {
    port = impl.server.bind_to_any_port(impl.options.host);
  } else if (!impl.server.bind_to_port(impl.options.host, port)) {
    port = -1;
  }
  if (port < 0) throw IoError("cannot bind " + impl.options.host + ":" + std::to_string(impl.options.port));
  impl.bound_port = port;
  return port;
}

void AnnotationServer::serve() { impl_->server.listen_after_bind(); }

void AnnotationServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool AnnotationServer::wait_until_ready() const {
  impl_->server.wait_until_ready();
  return impl_->server.is_running();
}

}  // namespace typescore::annotation
