#include "pyrofit/session.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "pyrofit/errors.hpp"

namespace pyrofit {

using nlohmann::json;

namespace {

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

struct EventJson {
  json operator()(const ScoreUpdate& e) const {
    return json{{"type", "score"},
                {"t_ms", e.t_ms},
                {"S", optional_json(e.S)},
                {"D", optional_json(e.D)},
                {"matched_demo_t_ms", optional_json(e.matched_demo_t_ms)}};
  }
  json operator()(const ReminderEvent& e) const {
    return json{{"type", "reminder"}, {"t_ms", e.t_ms}, {"D", e.D}, {"worst", e.worst}};
  }
  json operator()(const FireworkSpawn& e) const {
    json j = to_json(e.spec);
    j["type"] = "firework";
    return j;
  }
  json operator()(const Diagnostic& e) const {
    return json{{"type", "diagnostic"}, {"t_ms", e.t_ms}, {"msg", e.msg}};
  }
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(const std::optional<double>& v) {
  if (!v) return {};
  std::ostringstream os;
  os << std::setprecision(12) << *v;
  return os.str();
}

}  // namespace

json to_json(const Event& event) { return std::visit(EventJson{}, event); }

json to_json(const SessionSummary& s) {
  return json{{"id", s.id},
              {"demo", s.demo},
              {"start_t_ms", optional_json(s.start_t_ms)},
              {"end_t_ms", optional_json(s.end_t_ms)},
              {"mean_S", optional_json(s.mean_S)},
              {"max_S", optional_json(s.max_S)},
              {"min_S", optional_json(s.min_S)},
              {"reminder_count", s.reminder_count},
              {"firework_count", s.firework_count}};
}

SessionSummary summary_from_json(const json& j) {
  SessionSummary s;
  try {
    s.id = j.at("id").get<std::string>();
    s.demo = j.at("demo").get<std::string>();
    s.start_t_ms = optional_field<std::int64_t>(j, "start_t_ms");
    s.end_t_ms = optional_field<std::int64_t>(j, "end_t_ms");
    s.mean_S = optional_field<double>(j, "mean_S");
    s.max_S = optional_field<double>(j, "max_S");
    s.min_S = optional_field<double>(j, "min_S");
    s.reminder_count = j.at("reminder_count").get<std::uint64_t>();
    s.firework_count = j.at("firework_count").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw StorageError(std::string("bad summary record: ") + e.what());
  }
  return s;
}

ScoreStats score_stats(const std::vector<double>& scores) {
  ScoreStats st;
  if (scores.empty()) return st;
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
  st.mean = std::ceil(mean - 1e-9);
  st.max = *std::max_element(scores.begin(), scores.end());
  st.min = *std::min_element(scores.begin(), scores.end());
  return st;
}

DemoTrack build_demo_track(const KeypointStream& stream, const ReduceOptions& opts) {
  DemoTrack track;
  if (stream.header) {
    track.name = stream.header->name;
    track.fps = stream.header->fps;
  }
  track.frames.reserve(stream.frames.size());
  for (const KeypointFrame& f : stream.frames) {
    try {
      track.frames.push_back(reduce_to_pose13(f, opts));
    } catch (const DegenerateSkeleton&) {
    }
  }
  if (track.frames.empty()) throw EmptyTrack("demo track '" + track.name + "' has no usable frames");
  return track;
}

DemoTrack load_demo_track(const std::filesystem::path& path, const ReduceOptions& opts) {
  std::ifstream in(path);
  if (!in) throw MalformedRecord(0, "cannot open " + path.string());
  return build_demo_track(read_keypoint_stream(in, /*require_header=*/true), opts);
}

Session::Session(std::shared_ptr<const DemoTrack> demo, EngineConfig config, std::uint64_t seed_root, std::string id)
    : demo_(std::move(demo)), config_(std::move(config)), id_(std::move(id)), seeds_(seed_root) {
  if (!demo_ || demo_->frames.empty()) throw EmptyTrack("session needs a non-empty demo track");
  if (id_.empty()) id_ = "session-" + digest_hex(seed_root);
  const double window_s = config_.scoring.delay_window_s + config_.choreo.amplitude_window_ms / 1000.0;
  history_capacity_ = static_cast<std::size_t>(std::ceil(window_s * demo_->fps)) + 2;
  history_.reserve(history_capacity_ + 1);
  state_ = SessionState::Running;
}

std::vector<Event> Session::ingest_frame(const KeypointFrame& frame) {
  if (state_ != SessionState::Running) throw SessionClosed("session " + id_ + " is not running");
  if (last_t_ms_ && frame.t_ms <= *last_t_ms_) {
    throw OutOfOrderFrame("frame t_ms=" + std::to_string(frame.t_ms) + " after t_ms=" + std::to_string(*last_t_ms_));
  }
  last_t_ms_ = frame.t_ms;
  if (!first_t_ms_) first_t_ms_ = frame.t_ms;

  std::vector<Event> events;
  Pose13 pose;
  try {
    pose = reduce_to_pose13(frame, config_.reduce);
  } catch (const DegenerateSkeleton& e) {
    events.emplace_back(ScoreUpdate{frame.t_ms, {}, {}, {}});
    events.emplace_back(Diagnostic{frame.t_ms, e.what()});
    return events;
  }

  const auto remember = [&] {
    history_.push_back(pose);
    if (history_.size() > history_capacity_) history_.erase(history_.begin());
  };

  SimilarityResult result;
  try {
    result = align_and_score(pose, *demo_, config_.scoring, config_.limb_graph);
  } catch (const Error& e) {
    events.emplace_back(ScoreUpdate{frame.t_ms, {}, {}, {}});
    events.emplace_back(Diagnostic{frame.t_ms, e.what()});
    remember();
    return events;
  }

  events.emplace_back(ScoreUpdate{frame.t_ms, result.S, result.D, result.matched_demo_t_ms});
  score_series_.push_back({frame.t_ms, result.S, result.D});

  if (auto rem = reminder(result, frame.t_ms)) {
    if (!last_reminder_t_ms_ || frame.t_ms - *last_reminder_t_ms_ >= config_.session.reminder_debounce_ms) {
      last_reminder_t_ms_ = frame.t_ms;
      ++reminder_count_;
      events.emplace_back(*rem);
    }
  }

  if (result.S > 0.0 && !history_.empty()) {
    const auto specs = choreograph(pose, history_.back(), history_, result.S, config_.choreo, seeds_);
    for (const FireworkSpec& spec : specs) events.emplace_back(FireworkSpawn{spec});
    firework_count_ += specs.size();
  }

  remember();
  return events;
}

SessionSummary Session::close() {
  if (state_ == SessionState::Closed) throw SessionClosed("session " + id_ + " already closed");
  state_ = SessionState::Closed;

  std::vector<double> scores;
  scores.reserve(score_series_.size());
  for (const ScorePoint& p : score_series_) scores.push_back(p.S);
  const ScoreStats st = score_stats(scores);

  SessionSummary s;
  s.id = id_;
  s.demo = demo_->name;
  s.start_t_ms = first_t_ms_;
  s.end_t_ms = last_t_ms_;
  s.mean_S = st.mean;
  s.max_S = st.max;
  s.min_S = st.min;
  s.reminder_count = reminder_count_;
  s.firework_count = firework_count_;
  return s;
}

Session open_session(std::shared_ptr<const DemoTrack> demo, EngineConfig config, std::uint64_t seed_root,
                     std::string id) {
  return Session(std::move(demo), std::move(config), seed_root, std::move(id));
}

void persist_summary(const SessionSummary& summary, const std::filesystem::path& store) {
  std::ofstream out(store, std::ios::app | std::ios::binary);
  if (!out) throw StorageError("cannot open summary store " + store.string());
  out << to_json(summary).dump() << '\n';
  out.flush();
  if (!out) throw StorageError("write to summary store " + store.string() + " failed");
}

std::string export_csv(const std::filesystem::path& store) {
  std::string csv = "id,demo,mean_S,max_S,min_S,reminders,fireworks\n";
  std::ifstream in(store, std::ios::binary);
  if (!in) {
    if (std::filesystem::exists(store)) throw StorageError("cannot read summary store " + store.string());
    return csv;
  }
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw StorageError("corrupt summary store line in " + store.string());
    const SessionSummary s = summary_from_json(j);
    csv += csv_field(s.id) + ',' + csv_field(s.demo) + ',' + csv_number(s.mean_S) + ',' + csv_number(s.max_S) + ',' +
           csv_number(s.min_S) + ',' + std::to_string(s.reminder_count) + ',' + std::to_string(s.firework_count) +
           '\n';
  }
  return csv;
}

}  // namespace pyrofit
