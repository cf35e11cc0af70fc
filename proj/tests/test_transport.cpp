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

#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <thread>

#include "blinddrm/errors.hpp"
#include "blinddrm/metrics.hpp"
#include "blinddrm/transport.hpp"

using namespace blinddrm;
using namespace std::chrono_literals;

namespace {

const std::string kCard = "0123456789abcdef0123456789abcdef";

Message echo_step(const Message& m) {
  if (const auto* r = std::get_if<msg::StepReq>(&m)) return msg::StepResp{r->m + 1, Bytes{0xab}};
  return msg::StepErr{Errc::unknown_type, "echo only"};
}

std::unique_ptr<Server> local_server(Handler h, MetricsCounters* metrics = nullptr) {
  auto server = std::make_unique<Server>(
      std::make_unique<TcpListener>(Address::parse("127.0.0.1:0")), std::move(h), metrics);
  server->start();
  return server;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::invalid_argument;
}

}  // namespace

TEST(Transport, AddressParsing) {
  Address a = Address::parse("127.0.0.1:8080");
  EXPECT_EQ(a.host, "127.0.0.1");
  EXPECT_EQ(a.port, 8080);
  EXPECT_EQ(a.str(), "127.0.0.1:8080");
  for (const char* bad : {"", "127.0.0.1", ":80", "host:", "host:99999", "host:8x"}) {
    EXPECT_EQ(code_of([&] { Address::parse(bad); }), Errc::invalid_argument) << bad;
  }
}

TEST(Transport, MemoryPairDeliversInOrder) {
  auto [a, b] = memory_pair();
  for (int i = 0; i < 100; ++i) a->send(msg::StepReq{{kCard}, i});
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(std::get<msg::StepReq>(b->recv()).m, i);
  }
  EXPECT_EQ(code_of([&] { b->recv(20ms); }), Errc::timeout);
  a->close();
  EXPECT_EQ(code_of([&] { b->recv(1s); }), Errc::connection_closed);
  EXPECT_EQ(code_of([&] { a->send(msg::CatalogGet{}); }), Errc::connection_closed);
}

TEST(Transport, SendsAreChargedToTheSendersScope) {
  auto [a, b] = memory_pair();
  a->set_group_bits(64);
  MetricsCounters sender;
  {
    MetricsScope scope(&sender);
    a->send(msg::StepReq{{kCard, kCard}, 5});
    a->send(msg::CatalogGet{});
  }
  Metrics m = sender.snapshot();
  EXPECT_EQ(m.messages_sent, 2u);
  EXPECT_EQ(m.step_payload_bits, 2u * 128 + 64);
  EXPECT_EQ(m.bytes_sent, encode_frame(msg::StepReq{{kCard, kCard}, 5}).size() +
                              encode_frame(msg::CatalogGet{}).size());
}

TEST(Transport, BackgroundServiceAnswersCalls) {
  auto [client, server_end] = memory_pair();
  MetricsCounters server_metrics;
  BackgroundService svc(std::move(server_end), echo_step, &server_metrics);
  Message reply = call(*client, msg::StepReq{{kCard}, 41});
  EXPECT_EQ(std::get<msg::StepResp>(reply).m_out, 42);
  EXPECT_EQ(server_metrics.snapshot().messages_sent, 1u);
  svc.stop();
}

TEST(Transport, SocketSoakKeepsOrderAndLosesNothing) {
  auto server = local_server(echo_step);
  auto conn = tcp_connect(server->address());
  for (int i = 0; i < 1000; ++i) {
    Message reply = call(*conn, msg::StepReq{{kCard}, i});
    ASSERT_EQ(std::get<msg::StepResp>(reply).m_out, i + 1);
  }
  // Pipelined: everything sent before anything is read.
  for (int i = 0; i < 200; ++i) conn->send(msg::StepReq{{kCard}, 1000 + i});
  for (int i = 0; i < 200; ++i) {
    ASSERT_EQ(std::get<msg::StepResp>(conn->recv()).m_out, 1001 + i);
  }
  conn->close();
  server->stop();
}

TEST(Transport, ConcurrentClients) {
  auto server = local_server(echo_step);
  std::vector<std::thread> clients;
  std::atomic<int> ok{0};
  for (int c = 0; c < 8; ++c) {
    clients.emplace_back([&, c] {
      auto conn = tcp_connect(server->address());
      for (int i = 0; i < 50; ++i) {
        Message reply = call(*conn, msg::StepReq{{kCard}, c * 1000 + i});
        if (std::get<msg::StepResp>(reply).m_out == c * 1000 + i + 1) ++ok;
      }
    });
  }
  for (auto& t : clients) t.join();
  EXPECT_EQ(ok.load(), 400);
  server->stop();
}

TEST(Transport, GarbageFrameGetsAStructuredError) {
  auto server = local_server(echo_step);
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(server->address().port);
  ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  ASSERT_EQ(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  const std::uint8_t bad[] = {0, 0, 0, 2, 0x0b, 0x00};  // unknown type 11
  ASSERT_EQ(::write(fd, bad, sizeof bad), static_cast<ssize_t>(sizeof bad));
  std::uint8_t buf[512];
  ssize_t n = ::read(fd, buf, sizeof buf);
  ASSERT_GT(n, 4);
  Message reply = decode_frame(ByteView(buf, static_cast<std::size_t>(n)));
  ASSERT_TRUE(std::holds_alternative<msg::StepErr>(reply));
  EXPECT_EQ(std::get<msg::StepErr>(reply).code, Errc::unknown_type);
  // The connection stays usable after a bad frame.
  Bytes good = encode_frame(msg::StepReq{{kCard}, 7});
  ASSERT_EQ(::write(fd, good.data(), good.size()), static_cast<ssize_t>(good.size()));
  n = ::read(fd, buf, sizeof buf);
  EXPECT_EQ(std::get<msg::StepResp>(decode_frame(ByteView(buf, static_cast<std::size_t>(n)))).m_out, 8);
  ::close(fd);
  server->stop();
}

TEST(Transport, ConnectFailuresAndTimeouts) {
  TcpListener listener(Address::parse("127.0.0.1:0"));
  EXPECT_EQ(listener.accept(20ms), nullptr);
  Address dead = listener.address();
  listener.shutdown();
  EXPECT_THROW(tcp_connect(dead, 500ms), Error);
  auto server = local_server([](const Message&) -> Message {
    std::this_thread::sleep_for(300ms);
    return msg::CatalogGet{};
  });
  auto conn = tcp_connect(server->address());
  EXPECT_EQ(code_of([&] { call(*conn, msg::CatalogGet{}, 50ms); }), Errc::timeout);
  conn->close();
  server->stop();
}
