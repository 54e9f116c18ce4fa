#pragma once

#include <memory>
#include <string>
#include <thread>

#include "fleet/service/protocol.hpp"
#include "fleet/service/runner.hpp"

namespace fleet::service {

/// HTTP front of a running session:
///   POST /requests        submit an envelope, 202 with the request id
///   GET  /requests/:id    outcome once decided, 404 before
///   POST /resolve         {v, conflict, keep} for a parked conflict
///   GET  /conflicts       open conflicts
///   GET  /snapshot        latest published snapshot
///   GET  /events?since=N  events with seq >= N
///   GET  /stream          server-sent snapshot deltas (JSON Patch)
class HttpServer {
 public:
  HttpServer(RequestDesk& desk, const Board& board);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Returns the bound port, or -1 when binding fails.
  int start(const std::string& host, int port);
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = -1;
};

/// "host:port" or ":port" or "port".
std::pair<std::string, int> parse_address(const std::string& addr);

}  // namespace fleet::service
