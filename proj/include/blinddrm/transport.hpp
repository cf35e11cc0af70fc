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

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>

#include "blinddrm/metrics.hpp"
#include "blinddrm/wire.hpp"

namespace blinddrm {

using namespace std::chrono_literals;

inline constexpr std::chrono::milliseconds kDefaultTimeout = 5s;

/// Ordered, reliable, framed message pipe. This is also where a deployment
/// would put its encrypted, authenticated channel; the implementations here
/// are plaintext.
///
/// send() charges the frame to the caller's MetricsScope.
class Connection {
 public:
  virtual ~Connection() = default;
  /// Throws Errc::connection_closed.
  virtual void send(const Message& m) = 0;
  /// Throws Errc::timeout, Errc::connection_closed, or a DecodeError for a
  /// malformed frame.
  virtual Message recv(std::chrono::milliseconds timeout = kDefaultTimeout) = 0;
  virtual void close() = 0;

  /// Group width used to count step payload bits for this connection.
  void set_group_bits(unsigned bits) { group_bits_ = bits; }

 protected:
  void count_sent(const Message& m, std::size_t frame_bytes) const;

 private:
  unsigned group_bits_ = 0;
};

/// Two connected in-process endpoints. Messages cross as encoded frames so
/// byte counts match the socket transport exactly.
std::pair<std::unique_ptr<Connection>, std::unique_ptr<Connection>> memory_pair();

/// "host:port"; port 0 asks the system for a free one.
struct Address {
  std::string host;
  std::uint16_t port = 0;
  std::string str() const { return host + ":" + std::to_string(port); }
  static Address parse(std::string_view text);  // throws Errc::invalid_argument
};

std::unique_ptr<Connection> tcp_connect(const Address& addr,
                                        std::chrono::milliseconds timeout = kDefaultTimeout);

class TcpListener {
 public:
  explicit TcpListener(const Address& addr);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  Address address() const { return addr_; }
  /// Empty if nothing arrived within `timeout` or the listener was shut down.
  std::unique_ptr<Connection> accept(std::chrono::milliseconds timeout);
  void shutdown();

 private:
  int fd_ = -1;
  Address addr_;
  std::atomic<bool> closed_{false};
};

/// Sends `request` and waits for the reply.
Message call(Connection& conn, const Message& request,
             std::chrono::milliseconds timeout = kDefaultTimeout);

using Handler = std::function<Message(const Message&)>;

/// Answers requests on one connection until the peer closes or stop is set.
/// Frames that fail to decode are answered with STEP_ERR and the loop goes on.
void serve_connection(Connection& conn, const Handler& handler, const std::atomic<bool>& stop);

/// One thread per accepted connection. Handler calls run under `metrics`.
class Server {
 public:
  Server(std::unique_ptr<TcpListener> listener, Handler handler, MetricsCounters* metrics);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  Address address() const { return listener_->address(); }
  /// Applied to every accepted connection; see Connection::set_group_bits.
  void set_group_bits(unsigned bits) { group_bits_ = bits; }
  /// Runs on the calling thread until stop().
  void run();
  void start();  // run() on a background thread
  void stop();

 private:
  std::unique_ptr<TcpListener> listener_;
  Handler handler_;
  MetricsCounters* metrics_;
  unsigned group_bits_ = 0;
  std::atomic<bool> stop_{false};
  std::thread thread_;
  struct Worker {
    std::thread thread;
    std::shared_ptr<Connection> conn;
    std::shared_ptr<std::atomic<bool>> done;
  };
  void reap(bool all);

  std::mutex mu_;
  std::list<Worker> workers_;
};

/// Serves one in-memory endpoint on a background thread.
class BackgroundService {
 public:
  BackgroundService(std::unique_ptr<Connection> conn, Handler handler, MetricsCounters* metrics);
  ~BackgroundService();
  BackgroundService(const BackgroundService&) = delete;
  BackgroundService& operator=(const BackgroundService&) = delete;
  void stop();

 private:
  std::unique_ptr<Connection> conn_;
  std::atomic<bool> stop_{false};
  std::thread thread_;
};

}  // namespace blinddrm
