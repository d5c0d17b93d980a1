#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pyrofit/skeleton.hpp"

namespace pyrofit {

inline constexpr std::string_view kTrackFormat = "pyrofit-track/1";

/// `{"t_ms": <int>, "kp": [[x, y, c], ...17]}`. Extra members are ignored so
/// that protocol `frame` messages parse with the same routine.
KeypointFrame frame_from_json(const nlohmann::json& j);
nlohmann::json frame_to_json(const KeypointFrame& frame);

/// Parses one JSONL record. Throws MalformedRecord.
KeypointFrame parse_frame(std::string_view line);

/// One JSONL record without the trailing newline. Doubles are written in
/// shortest round-trip form, so parse_frame(serialize_frame(f)) == f.
std::string serialize_frame(const KeypointFrame& frame);

struct TrackHeader {
  std::string format{kTrackFormat};
  double fps = 30.0;
  std::string name;
};

nlohmann::json header_to_json(const TrackHeader& header);

struct KeypointStream {
  std::optional<TrackHeader> header;
  std::vector<KeypointFrame> frames;
};

/// Reads a JSONL keypoint stream. A leading header line is accepted when
/// present (and required when `require_header`). Blank lines are skipped.
/// Timestamps must be strictly increasing. MalformedRecord offsets are
/// relative to the start of the stream.
KeypointStream read_keypoint_stream(std::istream& in, bool require_header = false);

}  // namespace pyrofit
