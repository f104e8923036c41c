#pragma once

// HTTP front of a ScenarioStore.
//
//   POST  /scenarios                        config text -> {"scenario", "version"}
//   GET   /scenarios                        ids
//   GET   /scenarios/{id}/versions
//   GET   /scenarios/{id}/priomap?version=k GeoJSON
//   GET   /scenarios/{id}/tiles/{tile}?version=k
//   GET   /scenarios/{id}/summary?version=k
//   POST  /scenarios/{id}/flood             multipart field "flood" or raw GeoJSON body
//   PATCH /scenarios/{id}/weights           {"weights": [n, l, m, h]} or "n,l,m,h"
//
// Every successful response names its version in the body and in the
// X-Scenario-Version header. Validation errors answer 400, unknown ids 404
// and anything else 500, with body {"error": message, "kind": kind}.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "floodprio/pipeline.hpp"

namespace floodprio {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> static_dir;
  std::filesystem::path config_base = std::filesystem::current_path();
};

class HttpService {
 public:
  HttpService(ScenarioStore& store, ServerOptions options);
  ~HttpService();

  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // Binds and returns the bound port. Throws on failure.
  int bind();
  // Serves until stop(). Call after bind().
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace floodprio
