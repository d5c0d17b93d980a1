#include "pyrofit/protocol.hpp"

#include <algorithm>

#include "pyrofit/errors.hpp"

namespace pyrofit {

using nlohmann::json;

json diagnostic_message(std::string_view msg) { return json{{"type", "diagnostic"}, {"msg", msg}}; }

namespace {

ProtocolConnection::Reply message_reply(json msg) {
  ProtocolConnection::Reply r;
  r.messages.push_back(std::move(msg));
  return r;
}

ProtocolConnection::Reply closing_reply(json msg) {
  ProtocolConnection::Reply r = message_reply(std::move(msg));
  r.close = true;
  return r;
}

}  // namespace

ProtocolConnection::ProtocolConnection(std::shared_ptr<const DemoCatalog> catalog, EngineConfig config,
                                       std::uint64_t seed_root, std::string session_id)
    : catalog_(std::move(catalog)),
      config_(std::move(config)),
      seed_root_(seed_root),
      session_id_(std::move(session_id)) {}

ProtocolConnection::Reply ProtocolConnection::handle(std::string_view text) {
  if (ended_) return closing_reply(diagnostic_message("connection already ended"));
  const json msg = json::parse(text, nullptr, false);
  if (msg.is_discarded() || !msg.is_object()) return message_reply(diagnostic_message("message is not a JSON object"));
  const auto type = msg.find("type");
  if (type == msg.end() || !type->is_string()) return message_reply(diagnostic_message("message has no string 'type'"));

  const std::string& t = type->get_ref<const std::string&>();
  if (t == "hello") return on_hello(msg);
  if (t == "frame") return on_frame(msg);
  if (t == "bye") return on_bye();
  return message_reply(diagnostic_message("unknown message type '" + t + "' ignored"));
}

ProtocolConnection::Reply ProtocolConnection::on_hello(const json& msg) {
  if (session_) return message_reply(diagnostic_message("duplicate hello ignored"));
  const auto demo = msg.find("demo");
  if (demo == msg.end() || !demo->is_string()) {
    ended_ = true;
    return closing_reply(diagnostic_message("hello needs a string 'demo'"));
  }
  const auto track = catalog_->find(demo->get<std::string>());
  if (track == catalog_->end()) {
    ended_ = true;
    return closing_reply(diagnostic_message("unknown demo '" + demo->get<std::string>() + "'"));
  }
  if (const auto c = msg.find("client"); c != msg.end() && c->is_string()) client_ = c->get<std::string>();
  if (const auto s = msg.find("stream_frames"); s != msg.end() && s->is_boolean()) stream_frames_ = s->get<bool>();

  session_.emplace(open_session(track->second, config_, seed_root_, session_id_));
  if (stream_frames_) stepper_.emplace(config_.scene.dt_s);

  json cfg = to_json(config_);
  cfg["demo_fps"] = track->second->fps;
  return message_reply(json{{"type", "ready"}, {"session_id", session_id_}, {"config", std::move(cfg)}});
}

ProtocolConnection::Reply ProtocolConnection::on_frame(const json& msg) {
  if (!live()) return message_reply(diagnostic_message("frame before hello ignored"));
  KeypointFrame frame;
  try {
    frame = frame_from_json(msg);
  } catch (const MalformedRecord& e) {
    return message_reply(diagnostic_message(std::string("bad frame: ") + e.reason()));
  }

  std::vector<Event> events;
  try {
    events = session_->ingest_frame(frame);
  } catch (const OutOfOrderFrame& e) {
    return message_reply(diagnostic_message(e.what()));
  }

  Reply reply;
  reply.messages.reserve(events.size());
  for (const Event& e : events) reply.messages.push_back(to_json(e));
  if (stream_frames_) stream_pyro(frame.t_ms, events, reply);
  return reply;
}

void ProtocolConnection::stream_pyro(std::int64_t t_ms, const std::vector<Event>& events, Reply& reply) {
  const int steps = stepper_->advance_to(t_ms);
  for (int i = 0; i < steps; ++i) step(scene_, config_.scene);
  std::erase_if(scene_, [](const Firework& fw) { return fw.phase == Phase::Done; });
  for (const Event& e : events) {
    if (const auto* spawn_ev = std::get_if<FireworkSpawn>(&e)) scene_.push_back(spawn(spawn_ev->spec, config_.scene));
  }
  json frame = to_json(render_frame(scene_, t_ms));
  frame["type"] = "pyro_frame";
  reply.messages.push_back(std::move(frame));
}

ProtocolConnection::Reply ProtocolConnection::on_bye() {
  Reply reply;
  reply.close = true;
  ended_ = true;
  if (!live()) {
    reply.messages.push_back(diagnostic_message("bye without a session"));
    return reply;
  }
  SessionSummary summary = session_->close();
  json j = to_json(summary);
  j["type"] = "summary";
  reply.messages.push_back(std::move(j));
  reply.summary = std::move(summary);
  return reply;
}

std::optional<SessionSummary> ProtocolConnection::disconnect() {
  ended_ = true;
  if (!live()) return std::nullopt;
  return session_->close();
}

}  // namespace pyrofit
