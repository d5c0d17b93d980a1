#include "server.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <system_error>
#include <thread>
#include <vector>

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "pyrofit/errors.hpp"
#include "pyrofit/rng.hpp"

namespace pyrofit::tools {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

struct Shared {
  ServerOptions options;
  std::mutex log_mutex;
  std::mutex store_mutex;
  std::atomic<std::uint64_t> session_counter{0};

  void log(const std::string& line) {
    if (!options.log) return;
    std::lock_guard lock(log_mutex);
    *options.log << line << '\n';
    options.log->flush();
  }

  void persist(const SessionSummary& summary) {
    if (!options.store) return;
    std::lock_guard lock(store_mutex);
    try {
      persist_summary(summary, *options.store);
    } catch (const StorageError& e) {
      log(std::string("store error: ") + e.what());
    }
  }
};

std::string summary_line(const SessionSummary& s) {
  const auto num = [](const std::optional<double>& v) { return v ? std::to_string(*v) : std::string("null"); };
  return "session " + s.id + " closed demo=" + s.demo + " mean_S=" + num(s.mean_S) + " max_S=" + num(s.max_S) +
         " min_S=" + num(s.min_S) + " reminders=" + std::to_string(s.reminder_count) +
         " fireworks=" + std::to_string(s.firework_count);
}

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, std::shared_ptr<Shared> shared)
      : stream_(std::move(socket)), shared_(std::move(shared)) {
    const std::uint64_t n = ++shared_->session_counter;
    SplitMix64 mix(shared_->options.seed ^ (n * 0xD1B54A32D192ED03ull));
    const std::uint64_t seed = mix.next();
    id_ = "s" + std::to_string(n) + "-" + digest_hex(seed).substr(0, 8);
    proto_.emplace(shared_->options.catalog, shared_->options.config, seed, id_);
  }

  void start() {
    asio::dispatch(stream_.get_executor(), [self = shared_from_this()] { self->read_request(); });
  }

 private:
  void read_request() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_request(ec); });
  }

  void on_request(beast::error_code ec) {
    if (ec) return;
    if (!websocket::is_upgrade(request_) || request_.target() != shared_->options.path) {
      auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found, request_.version());
      res->set(http::field::content_type, "text/plain");
      res->body() = "pyrofit session endpoint is " + shared_->options.path + "\n";
      res->prepare_payload();
      http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      });
      return;
    }
    ws_.emplace(std::move(stream_));
    ws_->set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_->async_accept(request_, [self = shared_from_this()](beast::error_code e) {
      if (!e) self->read_message();
    });
  }

  void read_message() {
    ws_->async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      finish(proto_->disconnect());
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    record(text);

    const bool was_live = proto_->live();
    ProtocolConnection::Reply reply = proto_->handle(text);
    if (!was_live && proto_->live()) {
      shared_->log("session " + id_ + " opened client=" + proto_->client_name());
    }
    for (auto& m : reply.messages) enqueue(m.dump());
    if (reply.summary) finish(std::move(reply.summary));
    if (reply.close) {
      closing_ = true;
      if (!writing_) close();
      return;
    }
    read_message();
  }

  void enqueue(std::string text) {
    outbox_.push_back(std::move(text));
    if (!writing_) write_next();
  }

  void write_next() {
    if (outbox_.empty()) {
      writing_ = false;
      if (closing_) close();
      return;
    }
    writing_ = true;
    ws_->text(true);
    ws_->async_write(asio::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->outbox_.pop_front();
      self->write_next();
    });
  }

  void close() {
    ws_->async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

  void finish(std::optional<SessionSummary> summary) {
    if (!summary || finished_) return;
    finished_ = true;
    shared_->log(summary_line(*summary));
    shared_->persist(*summary);
  }

  void record(const std::string& text) {
    if (!shared_->options.record_dir) return;
    if (!recording_) recording_.emplace(*shared_->options.record_dir / (id_ + ".jsonl"), std::ios::binary);
    *recording_ << text << '\n';
  }

  beast::tcp_stream stream_;
  std::optional<websocket::stream<beast::tcp_stream>> ws_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
  std::shared_ptr<Shared> shared_;
  std::string id_;
  std::optional<ProtocolConnection> proto_;
  std::deque<std::string> outbox_;
  bool writing_ = false;
  bool closing_ = false;
  bool finished_ = false;
  std::optional<std::ofstream> recording_;
};

}  // namespace

struct SessionServer::Impl {
  explicit Impl(ServerOptions options) : shared(std::make_shared<Shared>()), acceptor(ioc) {
    shared->options = std::move(options);
  }

  void accept() {
    acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      std::make_shared<Connection>(std::move(socket), shared)->start();
      accept();
    });
  }

  std::shared_ptr<Shared> shared;
  asio::io_context ioc;
  tcp::acceptor acceptor;
  std::vector<std::thread> threads;
  std::mutex mutex;
  std::condition_variable stopped_cv;
  bool stopped = false;
};

SessionServer::SessionServer(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

SessionServer::~SessionServer() { stop(); }

std::uint16_t SessionServer::start() {
  const auto& opt = impl_->shared->options;
  beast::error_code ec;
  const auto address = asio::ip::make_address(opt.host, ec);
  if (ec) throw std::system_error(std::make_error_code(std::errc::invalid_argument), "bad host " + opt.host);
  const tcp::endpoint endpoint(address, opt.port);
  auto& acc = impl_->acceptor;
  try {
    acc.open(endpoint.protocol());
    acc.set_option(asio::socket_base::reuse_address(true));
    acc.bind(endpoint);
    acc.listen(asio::socket_base::max_listen_connections);
  } catch (const boost::system::system_error& e) {
    beast::error_code ignored;
    acc.close(ignored);
    throw std::system_error(std::error_code(e.code().value(), std::system_category()), e.what());
  }
  impl_->accept();
  for (int i = 0; i < std::max(1, opt.threads); ++i) {
    impl_->threads.emplace_back([this] { impl_->ioc.run(); });
  }
  return acc.local_endpoint().port();
}

void SessionServer::wait() {
  std::unique_lock lock(impl_->mutex);
  impl_->stopped_cv.wait(lock, [this] { return impl_->stopped; });
}

void SessionServer::stop() {
  if (!impl_) return;
  {
    std::lock_guard lock(impl_->mutex);
    if (impl_->stopped) return;
    impl_->stopped = true;
  }
  asio::post(impl_->ioc, [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
  });
  impl_->ioc.stop();
  for (auto& t : impl_->threads) {
    if (t.joinable()) t.join();
  }
  impl_->stopped_cv.notify_all();
}

}  // namespace pyrofit::tools
