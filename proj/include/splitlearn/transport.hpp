// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>

namespace splitlearn {

/// A reliable, ordered duplex byte stream owned by one session.
class Connection {
 public:
  virtual ~Connection() = default;

  virtual void send(std::span<const std::uint8_t> bytes) = 0;
  /// Blocks until `out` is full; throws ConnectionClosed if the peer is gone.
  virtual void recv_exact(std::span<std::uint8_t> out) = 0;
  virtual void close() = 0;

  /// Link time modeled for every byte that crossed this end so far, for
  /// transports that simulate a link. Real sockets return nullopt.
  virtual std::optional<std::uint64_t> modeled_transfer_ns() const { return std::nullopt; }
};

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

/// "host:port" (IPv4 dotted quad or hostname).
Endpoint parse_endpoint(const std::string& text);

class TcpConnection final : public Connection {
 public:
  explicit TcpConnection(int fd);
  ~TcpConnection() override;
  TcpConnection(const TcpConnection&) = delete;
  TcpConnection& operator=(const TcpConnection&) = delete;

  static std::unique_ptr<TcpConnection> connect(const Endpoint& to, int retries = 50);

  void send(std::span<const std::uint8_t> bytes) override;
  void recv_exact(std::span<std::uint8_t> out) override;
  void close() override;

 private:
  int fd_;
};

class TcpListener {
 public:
  /// Port 0 picks an ephemeral port; see port().
  explicit TcpListener(const Endpoint& at);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  std::unique_ptr<TcpConnection> accept();

 private:
  int fd_;
  std::uint16_t port_ = 0;
};

}  // namespace splitlearn
