#include <doctest.h>

#include "fixtures.hpp"
#include "pyrofit/protocol.hpp"
#include "pyrofit/session.hpp"
#include "pyrofit/synthetic.hpp"

using namespace pyrofit;
using nlohmann::json;

namespace {

std::shared_ptr<const DemoCatalog> catalog() {
  auto c = std::make_shared<DemoCatalog>();
  (*c)["routine"] = std::make_shared<const DemoTrack>(build_demo_track(synthetic_track(6.0, 30.0, "routine")));
  return c;
}

std::string frame_message(const KeypointFrame& f) {
  json j = frame_to_json(f);
  j["type"] = "frame";
  return j.dump();
}

std::string type_of(const json& m) { return m.at("type").get<std::string>(); }

}  // namespace

TEST_CASE("hello with an unknown demo closes the connection") {
  ProtocolConnection c(catalog(), {}, 1, "s1");
  const auto r = c.handle(R"({"type":"hello","demo":"yoga","client":"t"})");
  REQUIRE(r.messages.size() == 1);
  CHECK(type_of(r.messages[0]) == "diagnostic");
  CHECK(r.close);
  CHECK_FALSE(c.live());
  CHECK(c.handle(R"({"type":"hello","demo":"routine"})").close);
}

TEST_CASE("full session over the protocol") {
  ProtocolConnection c(catalog(), {}, 1, "s1");
  auto r = c.handle(R"({"type":"hello","demo":"routine","client":"browser"})");
  REQUIRE(r.messages.size() == 1);
  CHECK(type_of(r.messages[0]) == "ready");
  CHECK(r.messages[0].at("session_id") == "s1");
  CHECK(r.messages[0].at("config").at("d_std") == 65.0);
  CHECK(r.messages[0].at("config").at("demo_fps") == 30.0);
  CHECK(c.live());
  CHECK(c.client_name() == "browser");

  std::size_t scores = 0;
  for (const auto& f : synthetic_track(6.0, 30.0, "u").frames) {
    r = c.handle(frame_message(f));
    CHECK_FALSE(r.close);
    REQUIRE_FALSE(r.messages.empty());
    CHECK(type_of(r.messages[0]) == "score");
    CHECK(r.messages[0].at("S") == 100.0);
    for (const auto& m : r.messages) {
      const std::string t = type_of(m);
      scores += t == "score";
      CHECK((t == "score" || t == "firework"));
    }
  }
  CHECK(scores == 180);

  r = c.handle(R"({"type":"bye"})");
  CHECK(r.close);
  REQUIRE(r.summary.has_value());
  REQUIRE(r.messages.size() == 1);
  CHECK(type_of(r.messages[0]) == "summary");
  CHECK(r.messages[0].at("mean_S") == 100.0);
  CHECK(r.messages[0].at("id") == "s1");
  CHECK_FALSE(c.live());
}

TEST_CASE("bad input is answered with diagnostics") {
  ProtocolConnection c(catalog(), {}, 1, "s1");
  CHECK(type_of(c.handle("[1,2]").messages[0]) == "diagnostic");
  CHECK(type_of(c.handle("garbage").messages[0]) == "diagnostic");
  CHECK(type_of(c.handle(R"({"type":"frame","t_ms":0,"kp":[]})").messages[0]) == "diagnostic");
  c.handle(R"({"type":"hello","demo":"routine"})");

  auto r = c.handle(R"({"type":"wave"})");
  CHECK(type_of(r.messages[0]) == "diagnostic");
  CHECK_FALSE(r.close);
  CHECK(c.live());

  r = c.handle(R"({"type":"frame","t_ms":0,"kp":[[1,2]]})");
  CHECK(type_of(r.messages[0]) == "diagnostic");

  c.handle(frame_message(synthetic_frame(100)));
  r = c.handle(frame_message(synthetic_frame(50)));
  REQUIRE(r.messages.size() == 1);
  CHECK(type_of(r.messages[0]) == "diagnostic");
  CHECK(c.live());
}

TEST_CASE("disconnect closes the session without a reply") {
  ProtocolConnection c(catalog(), {}, 1, "s1");
  CHECK_FALSE(c.disconnect().has_value());
  ProtocolConnection d(catalog(), {}, 1, "s2");
  d.handle(R"({"type":"hello","demo":"routine"})");
  d.handle(frame_message(synthetic_frame(0)));
  const auto sum = d.disconnect();
  REQUIRE(sum.has_value());
  CHECK(sum->id == "s2");
  CHECK_FALSE(d.live());
}

TEST_CASE("opt-in pyro frame streaming") {
  ProtocolConnection c(catalog(), {}, 1, "s1");
  c.handle(R"({"type":"hello","demo":"routine","stream_frames":true})");
  std::size_t frames = 0;
  std::size_t lit = 0;
  for (const auto& f : synthetic_track(3.0, 30.0, "u").frames) {
    const auto r = c.handle(frame_message(f));
    const json& last = r.messages.back();
    REQUIRE(type_of(last) == "pyro_frame");
    CHECK(last.at("t_ms") == f.t_ms);
    ++frames;
    lit += !last.at("points").empty();
  }
  CHECK(frames == 90);
  CHECK(lit > 0);
}
