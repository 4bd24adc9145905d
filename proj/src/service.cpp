#include "rexcl/service.hpp"

#include <charconv>
#include <filesystem>
#include <mutex>
#include <optional>

#include <httplib.h>

#include "rexcl/classify.hpp"
#include "rexcl/evalkit.hpp"
#include "rexcl/export.hpp"
#include "rexcl/hf_filter.hpp"
#include "rexcl/store.hpp"

namespace rexcl {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse:
    case ErrorCode::kDecode:
    case ErrorCode::kStructure:
      return 400;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kUnsupportedMedia: return 415;
    case ErrorCode::kState: return 409;
    case ErrorCode::kNumbering: return 422;
    case ErrorCode::kClassification: return 502;
    case ErrorCode::kUndefinedCorrelation: return 400;
    case ErrorCode::kIo: return 500;
  }
  return 500;
}

namespace {

constexpr const char* kJsonType = "application/json";

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump() + "\n", kJsonType);
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, Json{{"code", std::string(to_string(code))}, {"message", message}}, http_status(code));
}

Json body_json(const httplib::Request& req) {
  if (trim(req.body).empty()) return Json::object();
  Json j = parse_json(req.body, "request body");
  if (!j.is_object()) throw Error(ErrorCode::kParse, "request body must be a JSON object");
  return j;
}

std::size_t query_size(const httplib::Request& req, const std::string& key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string v = req.get_param_value(key);
  std::size_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw Error(ErrorCode::kInvalidArgument, "query parameter '" + key + "' must be a non-negative integer");
  }
  return out;
}

template <class T>
T field(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kParse, std::string("field '") + key + "' has the wrong type");
  }
}

Json summary_json(const StoredDocument& d) {
  return Json{{"doc_id", d.doc_id},
              {"filename", d.filename},
              {"mode", std::string(to_string(d.mode))},
              {"extracted", d.extracted},
              {"classified", d.classified},
              {"row_count", d.rows.size()},
              {"removed_units", d.extraction.removed_units.size()},
              {"audit_count", d.audit.size()}};
}

}  // namespace

struct Service::Impl {
  ServiceConfig config;
  DocumentStore store;
  httplib::Server server;
  bool bound = false;

  std::once_flag hf_once, baseline_once;
  std::optional<ForestModel> hf_model;
  std::optional<BaselineModel> baseline_model;

  explicit Impl(ServiceConfig c) : config(std::move(c)), store(config.data_dir) {}

  const ForestModel& default_hf() {
    std::call_once(hf_once, [&] { hf_model = default_hf_model(); });
    return *hf_model;
  }
  const BaselineModel& default_baseline() {
    std::call_once(baseline_once, [&] { baseline_model = default_baseline_model(); });
    return *baseline_model;
  }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  // Maps exceptions to JSON error responses.
  static httplib::Server::Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const ClassificationError& e) {
        Json body{{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
        body["partial_rows"] = e.partial().rows;
        send_json(res, body, http_status(e.code()));
      } catch (const Error& e) {
        send_error(res, e.code(), e.what());
      } catch (const std::exception& e) {
        send_error(res, ErrorCode::kIo, e.what());
      }
    };
  }

  void routes() {
    server.Get("/healthz", guarded([](const auto&, auto& res) { send_json(res, Json{{"status", "ok"}}); }));

    server.Get("/documents", guarded([this](const auto&, auto& res) {
      Json out = Json::array();
      for (const auto& s : store.list()) {
        out.push_back(Json{{"doc_id", s.doc_id},
                           {"filename", s.filename},
                           {"extracted", s.extracted},
                           {"classified", s.classified}});
      }
      send_json(res, Json{{"documents", out}});
    }));

    server.Post("/documents", guarded([this](const auto& req, auto& res) {
      if (!req.is_multipart_form_data() || !req.has_file("file")) {
        throw Error(ErrorCode::kInvalidArgument, "expected multipart/form-data with a 'file' field");
      }
      const auto file = req.get_file_value("file");
      const std::string id = store.create(file.filename, file.content);
      send_json(res, summary_json(store.get(id)), 201);
    }));

    server.Get(R"(/documents/([^/]+))", guarded([this](const auto& req, auto& res) {
      send_json(res, summary_json(store.get(req.matches[1])));
    }));

    server.Post(R"(/documents/([^/]+)/extract)", guarded([this](const auto& req, auto& res) {
      const Json body = body_json(req);
      const std::string id = req.matches[1];
      const StoredDocument current = store.get(id);
      SourceMode mode = current.mode;
      if (body.contains("mode")) {
        const auto m = parse_source_mode(field<std::string>(body, "mode", ""));
        if (!m) throw Error(ErrorCode::kInvalidArgument, "mode must be 'md' or 'txt'");
        mode = *m;
      }
      std::optional<ForestModel> custom;
      if (body.contains("hf_model") && !body.at("hf_model").is_null()) {
        custom = ForestModel::from_json(body.at("hf_model"));
      }
      std::set<std::string> allowlist = default_allowlist();
      if (body.contains("allowlist")) {
        allowlist.clear();
        for (const auto& s : field<std::vector<std::string>>(body, "allowlist", {})) {
          for (auto& p : parse_allowlist(s)) allowlist.insert(p);
        }
      }
      const bool filter = field<bool>(body, "hf_filter", true);
      const ForestModel* model = filter ? (custom ? &*custom : &default_hf()) : nullptr;
      const auto next = store.update(
          id, [&](const StoredDocument& d) { return extract_document(d, mode, model, allowlist); });
      send_json(res, summary_json(next));
    }));

    server.Post(R"(/documents/([^/]+)/classify)", guarded([this](const auto& req, auto& res) {
      const Json body = body_json(req);
      const Json binding = body.value("binding", Json::object());
      const std::string type = field<std::string>(binding, "type", "builtin");
      std::optional<ClassifierBinding> b;
      if (type == "builtin") {
        if (binding.contains("model")) {
          b = BaselineModel::from_json(binding.at("model"));
        } else {
          b = default_baseline();
        }
      } else if (type == "external") {
        ExternalEndpoint ep;
        ep.url = field<std::string>(binding, "endpoint", "");
        if (ep.url.empty()) throw Error(ErrorCode::kInvalidArgument, "external binding needs 'endpoint'");
        ep.timeout_ms = field<int>(binding, "timeout_ms", config.classifier_timeout_ms);
        ep.batch_size = field<std::size_t>(binding, "batch_size", ep.batch_size);
        b = ep;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "binding type must be 'builtin' or 'external'");
      }
      const auto next =
          store.update(req.matches[1], [&](const StoredDocument& d) { return classify_document(d, *b); });
      send_json(res, summary_json(next));
    }));

    server.Get(R"(/documents/([^/]+)/rows)", guarded([this](const auto& req, auto& res) {
      const StoredDocument d = store.get(req.matches[1]);
      const std::size_t offset = query_size(req, "offset", 0);
      const std::size_t limit = query_size(req, "limit", 200);
      if (limit == 0 || limit > 1000) throw Error(ErrorCode::kInvalidArgument, "limit must be in [1, 1000]");
      Json rows = Json::array();
      for (std::size_t i = offset; i < d.rows.size() && i < offset + limit; ++i) rows.push_back(d.rows[i]);
      send_json(res, Json{{"doc_id", d.doc_id},
                          {"total", d.rows.size()},
                          {"offset", offset},
                          {"limit", limit},
                          {"rows", rows}});
    }));

    server.Patch(R"(/documents/([^/]+)/rows/([^/]+))", guarded([this](const auto& req, auto& res) {
      const Json body = body_json(req);
      const auto kind = parse_action_kind(field<std::string>(body, "action", ""));
      if (!kind) throw Error(ErrorCode::kInvalidArgument, "action must be CONFIRM, CORRECT or EDIT_TEXT");
      ReviewAction action;
      action.kind = *kind;
      if (*kind == ActionKind::kCorrect) {
        const auto label = parse_class_label(field<std::string>(body, "label", ""));
        if (!label) throw Error(ErrorCode::kInvalidArgument, "CORRECT needs a valid 'label'");
        action.label = label;
      } else if (*kind == ActionKind::kEditText) {
        action.text = field<std::string>(body, "text", "");
      }
      const std::string row_id = req.matches[2];
      const auto next = store.update(req.matches[1], [&](const StoredDocument& d) {
        if (!d.extracted) throw Error(ErrorCode::kState, "document is not extracted");
        return apply_correction(d, row_id, action);
      });
      for (const auto& r : next.rows) {
        if (r.object_identifier == row_id) {
          send_json(res, Json{{"row", r}, {"event", next.audit.back()}});
          return;
        }
      }
    }));

    server.Get(R"(/documents/([^/]+)/units)", guarded([this](const auto& req, auto& res) {
      const StoredDocument d = store.get(req.matches[1]);
      send_json(res, Json{{"doc_id", d.doc_id},
                          {"units", d.units},
                          {"removed_units", d.extraction.removed_units}});
    }));

    server.Get(R"(/documents/([^/]+)/audit)", guarded([this](const auto& req, auto& res) {
      const StoredDocument d = store.get(req.matches[1]);
      send_json(res, Json{{"doc_id", d.doc_id}, {"events", d.audit}});
    }));

    server.Get(R"(/documents/([^/]+)/export)", guarded([this](const auto& req, auto& res) {
      const StoredDocument d = store.get(req.matches[1]);
      const std::string name = req.has_param("format") ? req.get_param_value("format") : "csv";
      const auto format = parse_export_format(name);
      if (!format) throw Error(ErrorCode::kInvalidArgument, "format must be csv, json or yaml");
      if (!d.extracted) throw Error(ErrorCode::kState, "document is not extracted");
      const std::string stem = std::filesystem::path(d.filename).stem().string();
      res.set_header("Content-Disposition", "attachment; filename=\"" + stem + "." +
                                                std::string(to_string(*format)) + "\"");
      res.set_content(write_rows(d.rows, *format), std::string(content_type(*format)));
    }));

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        const auto code = res.status == 404 ? ErrorCode::kNotFound : ErrorCode::kInvalidArgument;
        send_error(res, code, httplib::status_message(res.status));
      }
    });

    if (!config.ui_dir.empty() && !server.set_mount_point("/ui", config.ui_dir)) {
      throw Error(ErrorCode::kIo, "cannot serve UI directory '" + config.ui_dir + "'");
    }
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
  impl_->routes();
}

Service::~Service() { stop(); }

int Service::bind() {
  int port = impl_->config.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(impl_->config.host);
    if (port < 0) throw Error(ErrorCode::kIo, "cannot bind " + impl_->config.host);
  } else if (!impl_->server.bind_to_port(impl_->config.host, port)) {
    throw Error(ErrorCode::kIo, "cannot bind " + impl_->config.host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  return port;
}

void Service::run() {
  if (!impl_->bound) throw Error(ErrorCode::kState, "service is not bound");
  impl_->server.listen_after_bind();
}

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace rexcl
