#pragma once

// HTTP API over the document store. JSON in, JSON out; errors are returned as
// {"code": ..., "message": ...} with a status derived from the error code.

#include <memory>
#include <string>

#include "rexcl/core.hpp"

namespace rexcl {

struct ServiceConfig {
  std::string data_dir = "rexcl-data";
  std::string host = "127.0.0.1";
  int port = 8080;         // 0 picks a free port
  std::string ui_dir;      // served under /ui when set
  int classifier_timeout_ms = 30000;
};

/// HTTP status for an error code.
int http_status(ErrorCode code);

class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket and returns the bound port. Throws Error(kIo).
  int bind();
  /// Serves until stop() is called. bind() must have succeeded.
  void run();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rexcl
