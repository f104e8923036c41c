#include "floodprio/http_service.hpp"

#include <charconv>

#include "floodprio/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace floodprio {

using nlohmann::json;

namespace {

std::string_view kind_label(ErrorKind k) {
  switch (k) {
    case ErrorKind::Validation:
      return "validation";
    case ErrorKind::NotFound:
      return "not-found";
    case ErrorKind::Internal:
      return "internal";
  }
  return "internal";
}

int status_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Validation:
      return 400;
    case ErrorKind::NotFound:
      return 404;
    case ErrorKind::Internal:
      return 500;
  }
  return 500;
}

void send_error(httplib::Response& res, ErrorKind kind, const std::string& message) {
  res.status = status_for(kind);
  const json body{{"error", message}, {"kind", std::string(kind_label(kind))}};
  res.set_content(body.dump(), "application/json");
}

// Maps engine errors onto status codes.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, e.kind(), e.what());
  } catch (const json::exception& e) {
    send_error(res, ErrorKind::Validation, std::string("malformed JSON: ") + e.what());
  } catch (const std::exception& e) {
    send_error(res, ErrorKind::Internal, e.what());
  }
}

std::optional<std::uint32_t> version_param(const httplib::Request& req) {
  if (!req.has_param("version")) return std::nullopt;
  const std::string v = req.get_param_value("version");
  std::uint32_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || out == 0) {
    fail_validation("version must be a positive integer, got '" + v + "'");
  }
  return out;
}

TileId tile_param(const std::string& s) {
  std::uint32_t out = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail_validation("tile id must be a non-negative integer, got '" + s + "'");
  }
  return TileId{out};
}

WeightVector weights_from_body(const std::string& body) {
  const std::string_view trimmed = body;
  const auto first = trimmed.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && trimmed[first] == '{') {
    const json doc = json::parse(body);
    const json& w = doc.at("weights");
    if (!w.is_array() || w.size() != 4) fail_validation("weights: expected an array of 4 numbers");
    WeightVector out{w[0].get<double>(), w[1].get<double>(), w[2].get<double>(),
                     w[3].get<double>()};
    out.validate();
    return out;
  }
  return parse_weights(body);
}

void send_json(httplib::Response& res, const std::string& body, std::uint32_t version,
               const char* type = "application/json") {
  res.set_header("X-Scenario-Version", std::to_string(version));
  res.set_content(body, type);
}

}  // namespace

struct HttpService::Impl {
  ScenarioStore& store;
  ServerOptions options;
  httplib::Server server;
  int port = -1;

  Impl(ScenarioStore& s, ServerOptions o) : store(s), options(std::move(o)) { routes(); }

  void reply_result(httplib::Response& res, const ScenarioResult& r, int status) {
    res.status = status;
    send_json(res, summary_json(r), r.version);
  }

  void routes() {
    server.Post("/scenarios", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const ScenarioConfig cfg = parse_scenario_config(req.body, options.config_base);
        const auto r = store.run_scenario(cfg);
        reply_result(res, *r, 201);
      });
    });

    server.Get("/scenarios", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        const json doc{{"scenarios", store.scenarios()}};
        res.set_content(doc.dump(), "application/json");
      });
    });

    server.Get(R"(/scenarios/([^/]+)/versions)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] {
                   const std::string id = req.matches[1];
                   send_json(res, store.versions_json(id), store.latest_version(id));
                 });
               });

    server.Get(R"(/scenarios/([^/]+)/priomap)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] {
                   const std::string id = req.matches[1];
                   const auto r = store.result(id, version_param(req));
                   send_json(res, store.priomap(id, r->version), r->version,
                             "application/geo+json");
                 });
               });

    server.Get(R"(/scenarios/([^/]+)/tiles/([^/]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] {
                   const std::string id = req.matches[1];
                   const TileId tile = tile_param(req.matches[2]);
                   const auto r = store.result(id, version_param(req));
                   send_json(res, store.tile_detail(id, tile, r->version), r->version);
                 });
               });

    server.Get(R"(/scenarios/([^/]+)/summary)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] {
                   const std::string id = req.matches[1];
                   const auto r = store.result(id, version_param(req));
                   send_json(res, summary_json(*r), r->version);
                 });
               });

    server.Post(R"(/scenarios/([^/]+)/flood)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] {
                    const std::string id = req.matches[1];
                    std::string body;
                    if (req.is_multipart_form_data()) {
                      if (req.has_file("flood")) {
                        body = req.get_file_value("flood").content;
                      } else if (!req.files.empty()) {
                        body = req.files.begin()->second.content;
                      } else {
                        fail_validation("multipart upload carries no file");
                      }
                    } else {
                      body = req.body;
                    }
                    const auto r = store.update_flood_text(id, std::move(body));
                    reply_result(res, *r, 201);
                  });
                });

    server.Patch(R"(/scenarios/([^/]+)/weights)",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   guarded(res, [&] {
                     const std::string id = req.matches[1];
                     store.latest_version(id);
                     const auto r = store.update_weights(id, weights_from_body(req.body));
                     reply_result(res, *r, 200);
                   });
                 });

    server.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
          try {
            std::rethrow_exception(ep);
          } catch (const std::exception& e) {
            send_error(res, ErrorKind::Internal, e.what());
          } catch (...) {
            send_error(res, ErrorKind::Internal, "unknown error");
          }
        });

    if (options.static_dir) server.set_mount_point("/", options.static_dir->string());
  }
};

HttpService::HttpService(ScenarioStore& store, ServerOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {}

HttpService::~HttpService() { stop(); }

int HttpService::bind() {
  Impl& i = *impl_;
  if (i.options.port == 0) {
    i.port = i.server.bind_to_any_port(i.options.host);
  } else {
    i.port = i.server.bind_to_port(i.options.host, i.options.port) ? i.options.port : -1;
  }
  if (i.port < 0) {
    throw Error(ErrorKind::Internal, "cannot bind " + i.options.host + ":" +
                                         std::to_string(i.options.port));
  }
  return i.port;
}

void HttpService::serve() { impl_->server.listen_after_bind(); }

void HttpService::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace floodprio
