#include <doctest.h>

#include <sstream>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "fixtures.hpp"
#include "pyrofit/session.hpp"
#include "pyrofit/synthetic.hpp"
#include "server.hpp"

using namespace pyrofit;
using namespace pyrofit::tools;
using nlohmann::json;
namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

class ThreadSafeLog : public std::stringbuf {
 public:
  std::string text() {
    std::lock_guard lock(mutex_);
    return str();
  }

 protected:
  int sync() override { return 0; }
  std::streamsize xsputn(const char* s, std::streamsize n) override {
    std::lock_guard lock(mutex_);
    return std::stringbuf::xsputn(s, n);
  }
  int_type overflow(int_type c) override {
    std::lock_guard lock(mutex_);
    return std::stringbuf::overflow(c);
  }

 private:
  std::recursive_mutex mutex_;
};

ServerOptions options(std::ostream* log) {
  ServerOptions opt;
  opt.host = "127.0.0.1";
  opt.port = 0;
  auto c = std::make_shared<DemoCatalog>();
  (*c)["routine"] = std::make_shared<const DemoTrack>(build_demo_track(synthetic_track(6.0, 30.0, "routine")));
  opt.catalog = c;
  opt.log = log;
  return opt;
}

class Client {
 public:
  explicit Client(std::uint16_t port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    asio::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/session");
  }

  void send(const json& j) { ws_.write(asio::buffer(j.dump())); }

  json receive() {
    beast::flat_buffer buf;
    ws_.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  }

  /// True once the server has closed the connection.
  bool closed() {
    beast::flat_buffer buf;
    beast::error_code ec;
    ws_.read(buf, ec);
    return ec == websocket::error::closed;
  }

 private:
  asio::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

json frame_message(const KeypointFrame& f) {
  json j = frame_to_json(f);
  j["type"] = "frame";
  return j;
}

/// Runs hello, frames, bye and returns every score S seen plus the summary.
std::pair<std::vector<double>, json> run_client(std::uint16_t port, const KeypointStream& stream) {
  Client c(port);
  c.send({{"type", "hello"}, {"demo", "routine"}, {"client", "test"}});
  const json ready = c.receive();
  REQUIRE(ready.at("type") == "ready");
  std::vector<double> scores;
  for (const auto& f : stream.frames) c.send(frame_message(f));
  c.send({{"type", "bye"}});
  while (true) {
    const json m = c.receive();
    if (m.at("type") == "score") scores.push_back(m.at("S").get<double>());
    if (m.at("type") == "summary") {
      CHECK(c.closed());
      return {scores, m};
    }
  }
}

}  // namespace

TEST_CASE("unknown demo gets a diagnostic and a close") {
  ThreadSafeLog buf;
  std::ostream log(&buf);
  SessionServer server(options(&log));
  const std::uint16_t port = server.start();
  Client c(port);
  c.send({{"type", "hello"}, {"demo", "nope"}});
  CHECK(c.receive().at("type") == "diagnostic");
  CHECK(c.closed());
  server.stop();
}

TEST_CASE("a client session ends with a summary log line and a stored summary") {
  fixtures::TempDir dir("server");
  ThreadSafeLog buf;
  std::ostream log(&buf);
  ServerOptions opt = options(&log);
  opt.store = dir / "store.jsonl";
  opt.record_dir = dir.path();
  SessionServer server(opt);
  const std::uint16_t port = server.start();

  const auto [scores, summary] = run_client(port, synthetic_track(3.0, 30.0, "u"));
  CHECK(scores.size() == 90);
  CHECK(summary.at("mean_S") == 100.0);
  server.stop();

  const std::string text = buf.text();
  CHECK(text.find("opened client=test") != std::string::npos);
  CHECK(text.find("closed demo=routine") != std::string::npos);
  const std::string csv = export_csv(dir / "store.jsonl");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);

  const std::string id = summary.at("id").get<std::string>();
  const std::string recorded = fixtures::read_text(dir / (id + ".jsonl"));
  CHECK(std::count(recorded.begin(), recorded.end(), '\n') == 92);
}

TEST_CASE("two concurrent clients get independent sessions") {
  SessionServer server(options(nullptr));
  const std::uint16_t port = server.start();
  RoutineParams off;
  off.phase_s = 1.3;
  off.jitter_px = 20;
  std::pair<std::vector<double>, json> a, b;
  std::thread ta([&] { a = run_client(port, synthetic_track(4.0, 30.0, "a")); });
  std::thread tb([&] { b = run_client(port, synthetic_track(4.0, 30.0, "b", off)); });
  ta.join();
  tb.join();
  server.stop();
  CHECK(a.first.size() == 120);
  CHECK(b.first.size() == 120);
  CHECK(a.second.at("id") != b.second.at("id"));
  CHECK(a.second.at("mean_S") == 100.0);
  CHECK(b.second.at("mean_S").get<double>() < 100.0);
}

TEST_CASE("non-upgrade requests get a 404") {
  SessionServer server(options(nullptr));
  const std::uint16_t port = server.start();
  asio::io_context ioc;
  beast::tcp_stream stream(ioc);
  tcp::resolver resolver(ioc);
  stream.connect(resolver.resolve("127.0.0.1", std::to_string(port)));
  beast::http::request<beast::http::empty_body> req(beast::http::verb::get, "/", 11);
  req.set(beast::http::field::host, "127.0.0.1");
  beast::http::write(stream, req);
  beast::flat_buffer buf;
  beast::http::response<beast::http::string_body> res;
  beast::http::read(stream, buf, res);
  CHECK(res.result() == beast::http::status::not_found);
  server.stop();
}

TEST_CASE("a busy port is reported") {
  SessionServer first(options(nullptr));
  const std::uint16_t port = first.start();
  ServerOptions opt = options(nullptr);
  opt.port = port;
  SessionServer second(opt);
  CHECK_THROWS_AS(second.start(), std::system_error);
}
