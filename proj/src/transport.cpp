// Copyright 2026 The blinddrm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "blinddrm/transport.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>

namespace blinddrm {

void Connection::count_sent(const Message& m, std::size_t frame_bytes) const {
  if (MetricsCounters* c = MetricsScope::current()) {
    c->add_message(frame_bytes, payload_bits(m, group_bits_));
  }
}

namespace {

using Clock = std::chrono::steady_clock;

Message decode_payload(ByteView payload) {
  try {
    return decode_message(payload);
  } catch (const DecodeError& e) {
    // Offsets are reported relative to the frame, header included.
    throw DecodeError(e.code(), e.offset() + 4, "in received frame");
  }
}

struct MemoryLink {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Bytes> queue[2];
  bool closed = false;
};

class MemoryConnection : public Connection {
 public:
  MemoryConnection(std::shared_ptr<MemoryLink> link, int side) : link_(std::move(link)), side_(side) {}
  ~MemoryConnection() override { close(); }

  void send(const Message& m) override {
    Bytes frame = encode_frame(m);
    // Counted before delivery so a peer that has the message also sees the count.
    count_sent(m, frame.size());
    {
      std::lock_guard lock(link_->mu);
      if (link_->closed) throw Error(Errc::connection_closed, "memory link closed");
      link_->queue[1 - side_].push_back(std::move(frame));
    }
    link_->cv.notify_all();
  }

  Message recv(std::chrono::milliseconds timeout) override {
    std::unique_lock lock(link_->mu);
    auto& inbox = link_->queue[side_];
    if (!link_->cv.wait_for(lock, timeout, [&] { return !inbox.empty() || link_->closed; })) {
      throw Error(Errc::timeout, "no message within " + std::to_string(timeout.count()) + " ms");
    }
    if (inbox.empty()) throw Error(Errc::connection_closed, "memory link closed");
    Bytes frame = std::move(inbox.front());
    inbox.pop_front();
    lock.unlock();
    return decode_payload(ByteView(frame).subspan(4));
  }

  void close() override {
    {
      std::lock_guard lock(link_->mu);
      link_->closed = true;
    }
    link_->cv.notify_all();
  }

 private:
  std::shared_ptr<MemoryLink> link_;
  int side_;
};

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

class SocketConnection : public Connection {
 public:
  explicit SocketConnection(int fd) : fd_(fd) { set_nodelay(fd_); }
  ~SocketConnection() override {
    close();
    ::close(fd_);
  }

  void send(const Message& m) override {
    Bytes frame = encode_frame(m);
    std::lock_guard lock(send_mu_);
    count_sent(m, frame.size());
    std::size_t off = 0;
    while (off < frame.size()) {
      ssize_t n = ::send(fd_, frame.data() + off, frame.size() - off, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw Error(Errc::connection_closed, std::string("send: ") + std::strerror(errno));
      off += static_cast<std::size_t>(n);
    }
  }

  Message recv(std::chrono::milliseconds timeout) override {
    const auto deadline = Clock::now() + timeout;
    std::uint8_t buf[1 << 16];
    for (;;) {
      if (auto payload = frames_.next()) return decode_payload(*payload);
      if (closed_) throw Error(Errc::connection_closed, "connection closed locally");
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      if (left.count() <= 0) {
        throw Error(Errc::timeout, "no message within " + std::to_string(timeout.count()) + " ms");
      }
      pollfd p{fd_, POLLIN, 0};
      int rc = ::poll(&p, 1, static_cast<int>(left.count()));
      if (rc < 0 && errno == EINTR) continue;
      if (rc < 0) throw Error(Errc::connection_closed, std::string("poll: ") + std::strerror(errno));
      if (rc == 0) continue;
      ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw Error(Errc::connection_closed, "peer closed the connection");
      frames_.feed(ByteView(buf, static_cast<std::size_t>(n)));
    }
  }

  void close() override {
    if (!closed_.exchange(true)) ::shutdown(fd_, SHUT_RDWR);
  }

 private:
  int fd_;
  std::mutex send_mu_;
  FrameAssembler frames_;
  std::atomic<bool> closed_{false};
};

struct AddrInfo {
  addrinfo* list = nullptr;
  AddrInfo(const Address& addr, bool passive) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    std::string port = std::to_string(addr.port);
    int rc = ::getaddrinfo(addr.host.empty() ? nullptr : addr.host.c_str(), port.c_str(), &hints, &list);
    if (rc != 0) {
      throw Error(Errc::io_error, "resolve " + addr.str() + ": " + ::gai_strerror(rc));
    }
  }
  ~AddrInfo() {
    if (list) ::freeaddrinfo(list);
  }
};

}  // namespace

std::pair<std::unique_ptr<Connection>, std::unique_ptr<Connection>> memory_pair() {
  auto link = std::make_shared<MemoryLink>();
  return {std::make_unique<MemoryConnection>(link, 0), std::make_unique<MemoryConnection>(link, 1)};
}

Address Address::parse(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    throw Error(Errc::invalid_argument, "address '" + std::string(text) + "' lacks a port");
  }
  std::string_view port = text.substr(colon + 1);
  if (port.empty() || port.size() > 5 || port.find_first_not_of("0123456789") != std::string_view::npos) {
    throw Error(Errc::invalid_argument, "bad port in '" + std::string(text) + "'");
  }
  unsigned long p = std::stoul(std::string(port));
  if (p > 65535) throw Error(Errc::invalid_argument, "port out of range in '" + std::string(text) + "'");
  Address a;
  a.host = std::string(text.substr(0, colon));
  if (a.host.size() >= 2 && a.host.front() == '[' && a.host.back() == ']') {
    a.host = a.host.substr(1, a.host.size() - 2);
  }
  if (a.host.empty()) throw Error(Errc::invalid_argument, "address '" + std::string(text) + "' lacks a host");
  a.port = static_cast<std::uint16_t>(p);
  return a;
}

std::unique_ptr<Connection> tcp_connect(const Address& addr, std::chrono::milliseconds timeout) {
  AddrInfo info(addr, false);
  std::string last_error = "no addresses";
  for (addrinfo* ai = info.list; ai; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    int flags = ::fcntl(fd, F_GETFL);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    if (rc < 0 && errno == EINPROGRESS) {
      pollfd p{fd, POLLOUT, 0};
      rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
      if (rc == 0) {
        ::close(fd);
        throw Error(Errc::timeout, "connect to " + addr.str());
      }
      int err = 0;
      socklen_t len = sizeof err;
      ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
      rc = err == 0 ? 0 : -1;
      errno = err;
    }
    if (rc == 0) {
      ::fcntl(fd, F_SETFL, flags);
      return std::make_unique<SocketConnection>(fd);
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  throw Error(Errc::connection_closed, "connect to " + addr.str() + ": " + last_error);
}

TcpListener::TcpListener(const Address& addr) {
  AddrInfo info(addr, true);
  for (addrinfo* ai = info.list; ai; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
      fd_ = fd;
      break;
    }
    ::close(fd);
  }
  if (fd_ < 0) throw Error(Errc::io_error, "cannot listen on " + addr.str() + ": " + std::strerror(errno));
  sockaddr_storage ss{};
  socklen_t len = sizeof ss;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&ss), &len);
  addr_.host = addr.host;
  addr_.port = ss.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&ss)->sin6_port)
                                        : ntohs(reinterpret_cast<sockaddr_in*>(&ss)->sin_port);
}

TcpListener::~TcpListener() {
  shutdown();
  ::close(fd_);
}

std::unique_ptr<Connection> TcpListener::accept(std::chrono::milliseconds timeout) {
  if (closed_) return nullptr;
  pollfd p{fd_, POLLIN, 0};
  int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
  if (rc <= 0 || closed_) return nullptr;
  int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
  if (fd < 0) return nullptr;
  return std::make_unique<SocketConnection>(fd);
}

void TcpListener::shutdown() {
  if (!closed_.exchange(true)) ::shutdown(fd_, SHUT_RDWR);
}

Message call(Connection& conn, const Message& request, std::chrono::milliseconds timeout) {
  conn.send(request);
  return conn.recv(timeout);
}

void serve_connection(Connection& conn, const Handler& handler, const std::atomic<bool>& stop) {
  while (!stop) {
    Message request;
    try {
      request = conn.recv(200ms);
    } catch (const DecodeError& e) {
      try {
        conn.send(msg::StepErr{e.code(), e.what()});
      } catch (const Error&) {
        return;
      }
      if (e.code() == Errc::oversize_frame) return;  // stream cannot be resynchronized
      continue;
    } catch (const Error& e) {
      if (e.code() == Errc::timeout) continue;
      return;
    }
    Message reply;
    try {
      reply = handler(request);
    } catch (const Error& e) {
      reply = msg::StepErr{e.code(), e.what()};
    } catch (const std::exception& e) {
      reply = msg::StepErr{Errc::invalid_argument, e.what()};
    }
    try {
      conn.send(reply);
    } catch (const Error&) {
      return;
    }
  }
}

Server::Server(std::unique_ptr<TcpListener> listener, Handler handler, MetricsCounters* metrics)
    : listener_(std::move(listener)), handler_(std::move(handler)), metrics_(metrics) {}

Server::~Server() { stop(); }

void Server::reap(bool all) {
  std::lock_guard lock(mu_);
  for (auto it = workers_.begin(); it != workers_.end();) {
    if (all || *it->done) {
      if (all) it->conn->close();
      it->thread.join();
      it = workers_.erase(it);
    } else {
      ++it;
    }
  }
}

void Server::run() {
  while (!stop_) {
    std::shared_ptr<Connection> conn = listener_->accept(200ms);
    reap(false);
    if (!conn) continue;
    conn->set_group_bits(group_bits_);
    auto done = std::make_shared<std::atomic<bool>>(false);
    std::lock_guard lock(mu_);
    std::thread t([this, conn, done] {
      MetricsScope scope(metrics_);
      serve_connection(*conn, handler_, stop_);
      conn->close();
      *done = true;
    });
    workers_.push_back({std::move(t), conn, done});
  }
}

void Server::start() {
  thread_ = std::thread([this] { run(); });
}

void Server::stop() {
  stop_ = true;
  listener_->shutdown();
  if (thread_.joinable()) thread_.join();
  reap(true);
}

BackgroundService::BackgroundService(std::unique_ptr<Connection> conn, Handler handler,
                                     MetricsCounters* metrics)
    : conn_(std::move(conn)) {
  thread_ = std::thread([this, handler = std::move(handler), metrics] {
    MetricsScope scope(metrics);
    serve_connection(*conn_, handler, stop_);
  });
}

BackgroundService::~BackgroundService() { stop(); }

void BackgroundService::stop() {
  stop_ = true;
  conn_->close();
  if (thread_.joinable()) thread_.join();
}

}  // namespace blinddrm
