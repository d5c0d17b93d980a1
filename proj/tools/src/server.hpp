#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include "pyrofit/config.hpp"
#include "pyrofit/protocol.hpp"

namespace pyrofit::tools {

struct ServerOptions {
  std::string host = "0.0.0.0";
  /// 0 picks an ephemeral port.
  std::uint16_t port = 8765;
  std::string path = "/session";
  EngineConfig config;
  std::shared_ptr<const DemoCatalog> catalog;
  std::uint64_t seed = 1;
  int threads = 2;
  /// Closed-session summaries are appended here when set.
  std::optional<std::filesystem::path> store;
  /// Incoming messages of each session are recorded to <dir>/<session_id>.jsonl when set.
  std::optional<std::filesystem::path> record_dir;
  /// One line per session open/close. Null disables logging.
  std::ostream* log = nullptr;
};

/// WebSocket front end for ProtocolConnection. Each connection runs on its
/// own strand; sessions share nothing mutable but the log and the store.
class SessionServer {
 public:
  explicit SessionServer(ServerOptions options);
  ~SessionServer();

  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  /// Binds and starts serving on background threads. Returns the bound port.
  /// Throws std::system_error when the port is unavailable.
  std::uint16_t start();

  /// Blocks until stop() is called (from another thread or a signal handler).
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pyrofit::tools
