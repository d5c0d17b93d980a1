#include "pyrofit/frame_io.hpp"

#include <cmath>
#include <limits>

#include "pyrofit/errors.hpp"

namespace pyrofit {

using nlohmann::json;

namespace {

double finite_number(const json& v, const char* what) {
  if (!v.is_number()) throw MalformedRecord(0, std::string(what) + " is not a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw MalformedRecord(0, std::string(what) + " is not finite");
  return d;
}

}  // namespace

KeypointFrame frame_from_json(const json& j) {
  if (!j.is_object()) throw MalformedRecord(0, "record is not an object");
  const auto t = j.find("t_ms");
  if (t == j.end() || !t->is_number_integer()) throw MalformedRecord(0, "missing integer 't_ms'");
  const auto kp = j.find("kp");
  if (kp == j.end() || !kp->is_array()) throw MalformedRecord(0, "missing array 'kp'");
  if (kp->size() != kCocoKeypoints) {
    throw MalformedRecord(0, "expected 17 keypoints, got " + std::to_string(kp->size()));
  }

  KeypointFrame frame;
  frame.t_ms = t->get<std::int64_t>();
  for (std::size_t i = 0; i < kCocoKeypoints; ++i) {
    const json& entry = (*kp)[i];
    if (!entry.is_array() || entry.size() != 3) {
      throw MalformedRecord(0, "keypoint " + std::to_string(i) + " is not [x, y, c]");
    }
    Keypoint& k = frame.keypoints[i];
    k.x = finite_number(entry[0], "x");
    k.y = finite_number(entry[1], "y");
    k.confidence = finite_number(entry[2], "confidence");
    if (k.confidence < 0.0 || k.confidence > 1.0) {
      throw MalformedRecord(0, "keypoint " + std::to_string(i) + " confidence outside [0,1]");
    }
  }
  return frame;
}

json frame_to_json(const KeypointFrame& frame) {
  json kp = json::array();
  for (const Keypoint& k : frame.keypoints) kp.push_back({k.x, k.y, k.confidence});
  return json{{"t_ms", frame.t_ms}, {"kp", std::move(kp)}};
}

KeypointFrame parse_frame(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw MalformedRecord(e.byte > 0 ? e.byte - 1 : 0, "invalid JSON");
  }
  return frame_from_json(j);
}

std::string serialize_frame(const KeypointFrame& frame) { return frame_to_json(frame).dump(); }

json header_to_json(const TrackHeader& header) {
  return json{{"format", header.format}, {"fps", header.fps}, {"name", header.name}};
}

KeypointStream read_keypoint_stream(std::istream& in, bool require_header) {
  KeypointStream out;
  std::string line;
  std::size_t offset = 0;
  bool first = true;
  while (std::getline(in, line)) {
    const std::size_t line_start = offset;
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw MalformedRecord(line_start + (e.byte > 0 ? e.byte - 1 : 0), "invalid JSON");
    }

    if (first) {
      first = false;
      if (j.is_object() && j.contains("format")) {
        const auto& fmt = j["format"];
        if (!fmt.is_string() || fmt.get<std::string>() != kTrackFormat) {
          throw MalformedRecord(line_start, "unsupported track format");
        }
        TrackHeader h;
        if (!j.contains("fps") || !j["fps"].is_number() || !(j["fps"].get<double>() > 0.0)) {
          throw MalformedRecord(line_start, "header 'fps' must be a positive number");
        }
        h.fps = j["fps"].get<double>();
        if (j.contains("name")) {
          if (!j["name"].is_string()) throw MalformedRecord(line_start, "header 'name' must be a string");
          h.name = j["name"].get<std::string>();
        }
        out.header = std::move(h);
        continue;
      }
      if (require_header) throw MalformedRecord(line_start, "missing track header");
    }

    KeypointFrame frame;
    try {
      frame = frame_from_json(j);
    } catch (const MalformedRecord& e) {
      throw MalformedRecord(line_start, e.reason());
    }
    if (!out.frames.empty() && frame.t_ms <= out.frames.back().t_ms) {
      throw MalformedRecord(line_start, "t_ms not strictly increasing");
    }
    out.frames.push_back(frame);
  }
  if (first && require_header) throw MalformedRecord(0, "missing track header");
  return out;
}

}  // namespace pyrofit
