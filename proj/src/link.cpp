// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitlearn/link.hpp"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "splitlearn/error.hpp"

namespace splitlearn {

LinkModel LinkModel::from_ms_mbps(double latency_ms, double bandwidth_mbps) {
  LinkModel m;
  m.latency_s = latency_ms / 1e3;
  m.bandwidth_bytes_per_s =
      bandwidth_mbps > 0.0 ? bandwidth_mbps * 1e6 / 8.0 : std::numeric_limits<double>::infinity();
  return m;
}

double LinkModel::transfer_seconds(std::size_t bytes, Direction dir) const {
  double latency = latency_s;
  double bandwidth = bandwidth_bytes_per_s;
  if (dir == Direction::downlink) {
    latency = downlink_latency_s.value_or(latency_s);
    bandwidth = downlink_bandwidth_bytes_per_s.value_or(bandwidth_bytes_per_s);
  }
  if (latency < 0.0 || !(bandwidth > 0.0)) throw std::invalid_argument("link latency must be >= 0 and bandwidth > 0");
  return latency + static_cast<double>(bytes) / bandwidth;
}

std::uint64_t LinkModel::transfer_ns(std::size_t bytes, Direction dir) const {
  return static_cast<std::uint64_t>(std::llround(transfer_seconds(bytes, dir) * 1e9));
}

namespace {

struct Chunk {
  std::vector<std::uint8_t> bytes;
  std::size_t offset = 0;
  std::uint64_t modeled_ns = 0;
  bool charged = false;
};

struct Pipe {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Chunk> chunks;
  bool closed = false;
};

struct Shared {
  Pipe up;    // client → server
  Pipe down;  // server → client
};

class LoopbackEnd final : public Connection {
 public:
  LoopbackEnd(std::shared_ptr<Shared> shared, LinkModel link, bool client_side)
      : shared_(std::move(shared)), link_(link), client_side_(client_side) {}
  ~LoopbackEnd() override { close(); }

  void send(std::span<const std::uint8_t> bytes) override {
    if (bytes.empty()) return;
    Pipe& p = outgoing();
    const std::uint64_t ns = link_.transfer_ns(bytes.size(), client_side_ ? Direction::uplink : Direction::downlink);
    {
      std::lock_guard lock(p.mu);
      if (p.closed) throw ConnectionClosed("peer closed the loopback connection");
      p.chunks.push_back(Chunk{std::vector<std::uint8_t>(bytes.begin(), bytes.end()), 0, ns, false});
    }
    p.cv.notify_all();
    modeled_ns_.fetch_add(ns, std::memory_order_relaxed);
  }

  void recv_exact(std::span<std::uint8_t> out) override {
    Pipe& p = incoming();
    std::size_t got = 0;
    std::unique_lock lock(p.mu);
    while (got < out.size()) {
      p.cv.wait(lock, [&] { return !p.chunks.empty() || p.closed; });
      if (p.chunks.empty()) throw ConnectionClosed("peer closed the loopback connection");
      Chunk& c = p.chunks.front();
      if (!c.charged) {
        modeled_ns_.fetch_add(c.modeled_ns, std::memory_order_relaxed);
        c.charged = true;
      }
      const std::size_t n = std::min(out.size() - got, c.bytes.size() - c.offset);
      std::memcpy(out.data() + got, c.bytes.data() + c.offset, n);
      got += n;
      c.offset += n;
      if (c.offset == c.bytes.size()) p.chunks.pop_front();
    }
  }

  void close() override {
    for (Pipe* p : {&shared_->up, &shared_->down}) {
      {
        std::lock_guard lock(p->mu);
        p->closed = true;
      }
      p->cv.notify_all();
    }
  }

  std::optional<std::uint64_t> modeled_transfer_ns() const override {
    return modeled_ns_.load(std::memory_order_relaxed);
  }

 private:
  Pipe& outgoing() { return client_side_ ? shared_->up : shared_->down; }
  Pipe& incoming() { return client_side_ ? shared_->down : shared_->up; }

  std::shared_ptr<Shared> shared_;
  LinkModel link_;
  bool client_side_;
  std::atomic<std::uint64_t> modeled_ns_{0};
};

}  // namespace

std::pair<std::unique_ptr<Connection>, std::unique_ptr<Connection>> loopback_transport(const LinkModel& link) {
  auto shared = std::make_shared<Shared>();
  return {std::make_unique<LoopbackEnd>(shared, link, true), std::make_unique<LoopbackEnd>(shared, link, false)};
}

}  // namespace splitlearn
