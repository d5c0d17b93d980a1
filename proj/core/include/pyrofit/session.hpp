#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "pyrofit/config.hpp"
#include "pyrofit/frame_io.hpp"
#include "pyrofit/similarity.hpp"

namespace pyrofit {

/// Emitted once per accepted frame. S and D are empty when the frame could
/// not be scored (a Diagnostic follows).
struct ScoreUpdate {
  std::int64_t t_ms = 0;
  std::optional<double> S;
  std::optional<double> D;
  std::optional<std::int64_t> matched_demo_t_ms;
};

struct FireworkSpawn {
  FireworkSpec spec;
};

struct Diagnostic {
  std::int64_t t_ms = 0;
  std::string msg;
};

using Event = std::variant<ScoreUpdate, ReminderEvent, FireworkSpawn, Diagnostic>;

/// Server-to-client wire message for an event.
nlohmann::json to_json(const Event& event);

struct SessionSummary {
  std::string id;
  std::string demo;
  std::optional<std::int64_t> start_t_ms;
  std::optional<std::int64_t> end_t_ms;
  /// Rounded up to the next integer.
  std::optional<double> mean_S;
  std::optional<double> max_S;
  std::optional<double> min_S;
  std::uint64_t reminder_count = 0;
  std::uint64_t firework_count = 0;
};

nlohmann::json to_json(const SessionSummary& summary);
SessionSummary summary_from_json(const nlohmann::json& j);

/// Mean (ceiling), max and min of a score series; all empty for an empty series.
struct ScoreStats {
  std::optional<double> mean;
  std::optional<double> max;
  std::optional<double> min;
};
ScoreStats score_stats(const std::vector<double>& scores);

/// Reduces and normalizes every frame of a track stream. Frames whose
/// skeleton is degenerate are dropped. Throws EmptyTrack when none remain.
DemoTrack build_demo_track(const KeypointStream& stream, const ReduceOptions& opts = {});

/// Throws MalformedRecord (including a missing header) or EmptyTrack.
DemoTrack load_demo_track(const std::filesystem::path& path, const ReduceOptions& opts = {});

enum class SessionState : std::uint8_t { Idle, Running, Closed };

struct ScorePoint {
  std::int64_t t_ms = 0;
  double S = 0.0;
  double D = 0.0;
};

/// One user's live training run against a demo track. Not thread-safe:
/// frames of one session must be ingested by a single owner in order.
class Session {
 public:
  Session(std::shared_ptr<const DemoTrack> demo, EngineConfig config, std::uint64_t seed_root, std::string id = {});

  /// Throws OutOfOrderFrame or SessionClosed. Scoring failures are reported
  /// as a Diagnostic event and leave the session running.
  std::vector<Event> ingest_frame(const KeypointFrame& frame);

  /// Throws SessionClosed when already closed.
  SessionSummary close();

  SessionState state() const { return state_; }
  const std::string& id() const { return id_; }
  const EngineConfig& config() const { return config_; }
  const DemoTrack& demo() const { return *demo_; }
  const std::vector<ScorePoint>& score_series() const { return score_series_; }
  const std::vector<Pose13>& history() const { return history_; }
  /// Frames kept in the history buffer: the delay and amplitude windows at the demo rate.
  std::size_t history_capacity() const { return history_capacity_; }

 private:
  std::shared_ptr<const DemoTrack> demo_;
  EngineConfig config_;
  std::string id_;
  SessionState state_ = SessionState::Idle;
  SplitMix64 seeds_;
  std::vector<Pose13> history_;
  std::size_t history_capacity_ = 0;
  std::vector<ScorePoint> score_series_;
  std::optional<std::int64_t> first_t_ms_;
  std::optional<std::int64_t> last_t_ms_;
  std::optional<std::int64_t> last_reminder_t_ms_;
  std::uint64_t reminder_count_ = 0;
  std::uint64_t firework_count_ = 0;
};

/// A running session with its seed stream rooted at `seed_root`.
Session open_session(std::shared_ptr<const DemoTrack> demo, EngineConfig config, std::uint64_t seed_root,
                     std::string id = {});

/// Appends one JSONL record. Throws StorageError.
void persist_summary(const SessionSummary& summary, const std::filesystem::path& store);

/// `id,demo,mean_S,max_S,min_S,reminders,fireworks` plus one row per stored
/// summary in append order. A missing store yields the header only.
std::string export_csv(const std::filesystem::path& store);

}  // namespace pyrofit
