// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "splitlearn/timing.hpp"
#include "splitlearn/transport.hpp"
#include "splitlearn/wire.hpp"

namespace splitlearn {

struct ChannelStats {
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_received = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
  std::uint64_t serialize_ns = 0;
  std::uint64_t io_ns = 0;
};

/// Framed messaging over a Connection with byte, time and tensor accounting.
class Channel {
 public:
  explicit Channel(Connection& conn, std::uint32_t max_payload = wire::kDefaultMaxPayload)
      : conn_(conn), max_payload_(max_payload) {}

  void send(const wire::WireMessage& m);
  wire::WireMessage recv();

  void send_tensor(wire::MsgType type, std::uint64_t step_id, const Tensor& t, wire::DType dtype);
  /// Receives the next frame and requires it to be `type` for `step_id`. An
  /// ERROR frame from the peer surfaces as ProtocolError with its text.
  Tensor recv_tensor(wire::MsgType type, std::uint64_t step_id);
  /// Decodes a received tensor frame and records it in the traffic log.
  Tensor open_tensor(const wire::WireMessage& m);
  /// As recv, but turns an unexpected type or step into ProtocolError.
  wire::WireMessage expect(wire::MsgType type, std::uint64_t step_id);

  /// Best-effort ERROR frame; never throws.
  void send_error(const std::string& text) noexcept;

  const ChannelStats& stats() const noexcept { return stats_; }
  std::uint64_t transfer_ns() const;
  bool modeled() const { return conn_.modeled_transfer_ns().has_value(); }

  /// Tensor frames seen since the last call.
  std::vector<TensorTraffic> take_traffic();
  std::uint64_t control_frames() const noexcept { return control_frames_; }

 private:
  Connection& conn_;
  std::uint32_t max_payload_;
  ChannelStats stats_;
  std::vector<TensorTraffic> traffic_;
  std::uint64_t control_frames_ = 0;
};

}  // namespace splitlearn
