#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pyrofit/pyro.hpp"
#include "pyrofit/session.hpp"

namespace pyrofit {

using DemoCatalog = std::map<std::string, std::shared_ptr<const DemoTrack>, std::less<>>;

/// Transport-independent state machine for one client connection.
///
/// client -> server: hello {demo, client[, stream_frames]}, frame {t_ms, kp}, bye
/// server -> client: ready, score, reminder, firework, summary, diagnostic, and
/// pyro_frame when the client asked for server-side simulation in hello.
class ProtocolConnection {
 public:
  struct Reply {
    std::vector<nlohmann::json> messages;
    bool close = false;
    /// Set when this message ended a session.
    std::optional<SessionSummary> summary;
  };

  ProtocolConnection(std::shared_ptr<const DemoCatalog> catalog, EngineConfig config, std::uint64_t seed_root,
                     std::string session_id);

  Reply handle(std::string_view text);

  /// The transport went away. Closes a running session without sending anything.
  std::optional<SessionSummary> disconnect();

  bool live() const { return session_.has_value() && session_->state() == SessionState::Running; }
  const std::string& session_id() const { return session_id_; }
  const std::string& client_name() const { return client_; }

 private:
  Reply on_hello(const nlohmann::json& msg);
  Reply on_frame(const nlohmann::json& msg);
  Reply on_bye();
  void stream_pyro(std::int64_t t_ms, const std::vector<Event>& events, Reply& reply);

  std::shared_ptr<const DemoCatalog> catalog_;
  EngineConfig config_;
  std::uint64_t seed_root_;
  std::string session_id_;
  std::string client_;
  std::optional<Session> session_;
  bool ended_ = false;

  bool stream_frames_ = false;
  std::vector<Firework> scene_;
  std::optional<FixedStepper> stepper_;
};

nlohmann::json diagnostic_message(std::string_view msg);

}  // namespace pyrofit
