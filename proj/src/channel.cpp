// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitlearn/channel.hpp"

#include <array>

#include "splitlearn/error.hpp"

namespace splitlearn {

using wire::MsgType;
using wire::WireMessage;

void Channel::send(const WireMessage& m) {
  Stopwatch encode;
  const auto frame = wire::frame_message(m);
  stats_.serialize_ns += encode.elapsed_ns();
  Stopwatch io;
  conn_.send(frame);
  stats_.io_ns += io.elapsed_ns();
  ++stats_.frames_sent;
  stats_.bytes_sent += frame.size();
  if (!wire::carries_tensor(m.type)) ++control_frames_;
}

WireMessage Channel::recv() {
  std::array<std::uint8_t, wire::kHeaderSize> header{};
  Stopwatch io;
  conn_.recv_exact(header);
  std::uint64_t io_ns = io.elapsed_ns();
  const auto fh = wire::parse_header(header, max_payload_);
  WireMessage m{fh.type, fh.step_id, std::vector<std::uint8_t>(fh.payload_len)};
  Stopwatch body;
  conn_.recv_exact(m.payload);
  io_ns += body.elapsed_ns();
  stats_.io_ns += io_ns;
  ++stats_.frames_received;
  stats_.bytes_received += wire::kHeaderSize + fh.payload_len;
  if (!wire::carries_tensor(m.type)) ++control_frames_;
  return m;
}

void Channel::send_tensor(MsgType type, std::uint64_t step_id, const Tensor& t, wire::DType dtype) {
  Stopwatch encode;
  WireMessage m{type, step_id, wire::encode_tensor(t, dtype)};
  stats_.serialize_ns += encode.elapsed_ns();
  const std::size_t data = wire::tensor_data_bytes(m.payload);
  send(m);
  traffic_.push_back({type, true, step_id, t.shape(), data, wire::kHeaderSize + m.payload.size()});
}

WireMessage Channel::expect(MsgType type, std::uint64_t step_id) {
  WireMessage m = recv();
  if (m.type == MsgType::error) {
    throw ProtocolError("peer reported an error: " + std::string(m.payload.begin(), m.payload.end()));
  }
  if (m.type != type) {
    throw ProtocolError("expected " + std::string(wire::to_string(type)) + " for step " + std::to_string(step_id) +
                        ", got " + std::string(wire::to_string(m.type)));
  }
  if (m.step_id != step_id) {
    throw ProtocolError(std::string(wire::to_string(type)) + " carries step " + std::to_string(m.step_id) +
                        ", expected " + std::to_string(step_id));
  }
  return m;
}

Tensor Channel::recv_tensor(MsgType type, std::uint64_t step_id) { return open_tensor(expect(type, step_id)); }

Tensor Channel::open_tensor(const WireMessage& m) {
  Stopwatch decode;
  Tensor t = wire::decode_tensor(m.payload);
  stats_.serialize_ns += decode.elapsed_ns();
  traffic_.push_back({m.type, false, m.step_id, t.shape(), wire::tensor_data_bytes(m.payload),
                      wire::kHeaderSize + m.payload.size()});
  return t;
}

void Channel::send_error(const std::string& text) noexcept {
  try {
    send(WireMessage{MsgType::error, 0, std::vector<std::uint8_t>(text.begin(), text.end())});
  } catch (...) {
  }
}

std::uint64_t Channel::transfer_ns() const {
  if (auto modeled = conn_.modeled_transfer_ns()) return *modeled;
  return stats_.io_ns;
}

std::vector<TensorTraffic> Channel::take_traffic() {
  std::vector<TensorTraffic> out;
  out.swap(traffic_);
  return out;
}

}  // namespace splitlearn
