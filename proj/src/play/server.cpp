#include <deque>
#include <fstream>
#include <mutex>
#include <sstream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "knowpc/play_server.hpp"

namespace knowpc::play {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

constexpr size_t kMaxQueuedFrames = 256;

std::string_view mime_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html") return "text/html";
  if (ext == ".js") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".png") return "image/png";
  if (ext == ".svg") return "image/svg+xml";
  return "application/octet-stream";
}

}  // namespace

class Game;

struct Server::Impl {
  explicit Impl(ServerOptions o)
      : opt(std::move(o)), acceptor(ioc) {
    const tcp::endpoint ep(net::ip::make_address(opt.address), opt.port);
    acceptor.open(ep.protocol());
    acceptor.set_option(net::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen();
  }

  void accept();
  void finish_game(const std::vector<LoggedStep>& log);

  ServerOptions opt;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::weak_ptr<Game> active;
  mutable std::mutex finished_mutex;
  std::vector<std::vector<LoggedStep>> finished;
};

class Game : public std::enable_shared_from_this<Game> {
 public:
  Game(Server::Impl& server, tcp::socket socket)
      : server_(server),
        ws_(std::move(socket)),
        timer_(ws_.get_executor()),
        session_(server.opt.layout, server.opt.program, server.opt.human_chef, server.opt.seed,
                 server.opt.horizon) {}

  void start(http::request<http::string_body> req) {
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return stop();
    send(session_.snapshot());
    read();
    next_tick_ = std::chrono::steady_clock::now() + server_.opt.tick;
    schedule();
  }

  void schedule() {
    timer_.expires_at(next_tick_);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) { self->on_tick(ec); });
  }

  void on_tick(beast::error_code ec) {
    if (ec || stopped_) return;
    send(session_.tick());
    if (session_.done()) {
      send(session_.end_message());
      closing_ = true;
      server_.finish_game(session_.log());
      return;
    }
    next_tick_ += server_.opt.tick;
    schedule();
  }

  void read() {
    ws_.async_read(in_, [self = shared_from_this()](beast::error_code ec, size_t) {
      self->on_read(ec);
    });
  }

  void on_read(beast::error_code ec) {
    if (ec) return stop();
    const auto text = beast::buffers_to_string(in_.data());
    in_.consume(in_.size());
    const auto parsed = parse_client_message(text);
    if (const auto* a = std::get_if<sim::EnvAction>(&parsed)) {
      session_.submit(*a);
    } else {
      send(error_message(std::get<std::string>(parsed)));
    }
    read();
  }

  void send(const nlohmann::json& msg) {
    if (stopped_) return;
    if (out_.size() >= kMaxQueuedFrames) return stop();
    out_.push_back(msg.dump());
    if (out_.size() == 1) write();
  }

  void write() {
    ws_.text(true);
    ws_.async_write(net::buffer(out_.front()),
                    [self = shared_from_this()](beast::error_code ec, size_t) { self->on_write(ec); });
  }

  void on_write(beast::error_code ec) {
    if (ec) return stop();
    out_.pop_front();
    if (!out_.empty()) return write();
    if (closing_) {
      ws_.async_close(websocket::close_code::normal,
                      [self = shared_from_this()](beast::error_code) { self->stop(); });
    }
  }

  void stop() {
    if (stopped_) return;
    stopped_ = true;
    timer_.cancel();
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().close(ignored);
  }

  Server::Impl& server_;
  websocket::stream<beast::tcp_stream> ws_;
  net::steady_timer timer_;
  PlaySession session_;
  beast::flat_buffer in_;
  std::deque<std::string> out_;
  std::chrono::steady_clock::time_point next_tick_;
  bool closing_ = false;
  bool stopped_ = false;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(Server::Impl& server, tcp::socket socket)
      : server_(server), stream_(std::move(socket)) {}

  void start() {
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, size_t) { self->on_read(ec); });
  }

 private:
  void on_read(beast::error_code ec) {
    if (ec) return;
    if (websocket::is_upgrade(req_)) {
      if (req_.target() != "/play") return respond(http::status::not_found, "no such endpoint\n", "text/plain");
      if (!server_.active.expired()) {
        return respond(http::status::conflict, "a game is already running\n", "text/plain");
      }
      auto game = std::make_shared<Game>(server_, stream_.release_socket());
      server_.active = game;
      game->start(std::move(req_));
      return;
    }
    if (req_.method() != http::verb::get) {
      return respond(http::status::method_not_allowed, "GET only\n", "text/plain");
    }
    const std::string target(req_.target());
    if (target == "/layout") {
      const auto body = layout_json(*server_.opt.layout, server_.opt.human_chef, server_.opt.horizon);
      return respond(http::status::ok, body.dump(), "application/json");
    }
    serve_static(target);
  }

  void serve_static(std::string target) {
    if (!server_.opt.static_dir || target.find("..") != std::string::npos || target.empty() ||
        target.front() != '/') {
      return respond(http::status::not_found, "not found\n", "text/plain");
    }
    if (const auto q = target.find('?'); q != std::string::npos) target.resize(q);
    if (target == "/") target = "/index.html";
    const auto path = *server_.opt.static_dir / target.substr(1);
    std::ifstream in(path, std::ios::binary);
    if (!in) return respond(http::status::not_found, "not found\n", "text/plain");
    std::stringstream ss;
    ss << in.rdbuf();
    respond(http::status::ok, ss.str(), mime_type(path));
  }

  void respond(http::status status, std::string body, std::string_view type) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::content_type, std::string(type));
    res->keep_alive(false);
    res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  Server::Impl& server_;
  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

void Server::Impl::accept() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<HttpConnection>(*this, std::move(socket))->start();
    accept();
  });
}

void Server::Impl::finish_game(const std::vector<LoggedStep>& log) {
  std::lock_guard lock(finished_mutex);
  finished.push_back(log);
  if (opt.log_dir) {
    std::filesystem::create_directories(*opt.log_dir);
    const auto path = *opt.log_dir / ("game_" + std::to_string(finished.size()) + ".ndjson");
    std::ofstream(path) << log_to_ndjson(log);
  }
}

Server::Server(ServerOptions options) {
  if (!options.layout) throw std::invalid_argument("server needs a layout");
  if (options.human_chef != 0 && options.human_chef != 1) {
    throw std::invalid_argument("human_chef must be 0 or 1");
  }
  impl_ = std::make_unique<Impl>(std::move(options));
}

Server::~Server() = default;

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() {
  impl_->accept();
  impl_->ioc.run();
}

void Server::stop() {
  net::post(impl_->ioc, [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
    impl_->ioc.stop();
  });
}

std::vector<std::vector<LoggedStep>> Server::finished_games() const {
  std::lock_guard lock(impl_->finished_mutex);
  return impl_->finished;
}

}  // namespace knowpc::play
