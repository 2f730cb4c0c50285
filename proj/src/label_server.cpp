#include <thread>

#include <fmt/format.h>

#include "epigraph/label_api.hpp"
#include "httplib.h"
#include "json.hpp"

namespace epigraph::label {

namespace {

using nlohmann::json;

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", message}}.dump(), "application/json");
}

// Maps the service's exception types onto HTTP statuses.
template <typename F>
auto guarded(F handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.what());
    } catch (const ConflictError& e) {
      send_error(res, 409, e.what());
    } catch (const ConfigError& e) {
      send_error(res, 400, e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, std::string("malformed request body: ") + e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

std::size_t size_param(const httplib::Request& req, const char* name, std::size_t fallback) {
  if (!req.has_param(name)) return fallback;
  const std::string v = req.get_param_value(name);
  try {
    std::size_t used = 0;
    const long n = std::stol(v, &used);
    if (used != v.size() || n < 0) throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("query parameter '{}' must be a non-negative integer", name));
  }
}

json summary_json(const TaskSummary& s) {
  json j{{"id", s.task.id},
         {"kind", std::string(to_string(s.task.kind))},
         {"image_url", "/api/tasks/" + s.task.id + "/image"},
         {"status", s.label ? "labeled" : "unlabeled"}};
  if (s.task.mcc) j["mcc"] = *s.task.mcc;
  if (s.label) j["label"] = *s.label;
  return j;
}

}  // namespace

struct LabelServer::Impl {
  LabelService& service;
  ServerOptions options;
  httplib::Server server;
  std::thread thread;
  int port = 0;

  Impl(LabelService& s, ServerOptions o) : service(s), options(std::move(o)) { routes(); }

  void routes() {
    server.Get("/api/tasks", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const TaskKind kind = parse_task_kind(req.has_param("kind") ? req.get_param_value("kind") : "kernel");
      const StatusFilter status =
          parse_status_filter(req.has_param("status") ? req.get_param_value("status") : "unlabeled");
      const std::size_t page = size_param(req, "page", 0);
      const std::size_t page_size = size_param(req, "page_size", 0);
      const TaskPage result = service.list(kind, status, page, page_size);
      json tasks = json::array();
      for (const TaskSummary& s : result.tasks) tasks.push_back(summary_json(s));
      res.set_content(json{{"kind", std::string(to_string(kind))},
                           {"total", result.total},
                           {"page", page},
                           {"page_size", page_size},
                           {"tasks", tasks}}
                          .dump(),
                      "application/json");
    }));

    server.Get(R"(/api/tasks/([^/]+)/image)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto png = service.task_png(req.matches[1].str());
                 res.set_content(std::string(png.begin(), png.end()), "image/png");
               }));

    server.Post(R"(/api/tasks/([^/]+)/label)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = json::parse(req.body);
                  if (!body.contains("label") || !body["label"].is_string()) {
                    throw ConfigError("request body must be {\"label\": \"...\"}");
                  }
                  const LabelRecord rec = service.submit(req.matches[1].str(), body["label"].get<std::string>());
                  res.set_content(json{{"id", rec.id},
                                       {"kind", std::string(to_string(rec.kind))},
                                       {"label", rec.label},
                                       {"timestamp", rec.timestamp}}
                                      .dump(),
                                  "application/json");
                }));

    server.Get("/api/progress", guarded([this](const httplib::Request&, httplib::Response& res) {
      const Progress p = service.progress();
      res.set_content(json{{"total", p.total}, {"labeled", p.labeled}, {"by_class", p.by_class}}.dump(),
                      "application/json");
    }));

    server.Get("/api/export", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const TaskKind kind = parse_task_kind(req.has_param("kind") ? req.get_param_value("kind") : "kernel");
      res.set_header("Content-Disposition",
                     fmt::format("attachment; filename=\"{}_labels.csv\"", to_string(kind)));
      res.set_content(service.export_csv(kind), "text/csv");
    }));

    if (options.ui_dir) server.set_mount_point("/", options.ui_dir->string());
  }

  int bind() {
    if (options.port == 0) {
      port = server.bind_to_any_port(options.host);
    } else {
      port = server.bind_to_port(options.host, options.port) ? options.port : -1;
    }
    if (port < 0) throw IoError(fmt::format("cannot bind {}:{}", options.host, options.port));
    return port;
  }
};

LabelServer::LabelServer(LabelService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

LabelServer::~LabelServer() { stop(); }

int LabelServer::start() {
  const int port = impl_->bind();
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void LabelServer::run() {
  impl_->bind();
  impl_->server.listen_after_bind();
}

void LabelServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace epigraph::label
