// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "splitlearn/plan.hpp"
#include "splitlearn/tensor.hpp"

namespace splitlearn::wire {

// Frame layout (all integers little-endian):
//
//   offset  size  field
//        0     4  magic "SPLZ"
//        4     1  version (0x01)
//        5     1  message type
//        6     8  step id
//       14     4  payload length
//       18     n  payload
//
// Tensor payload layout:
//
//        0     1  dtype (0x01 float32, 0x02 float64)
//        1     1  rank
//        2  4·r   dims, uint32 each
//    2+4·r     …  elements, row-major

inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::size_t kHeaderSize = 18;
inline constexpr std::uint32_t kDefaultMaxPayload = 256u * 1024u * 1024u;

enum class MsgType : std::uint8_t {
  hello = 0x01,
  plan_ack = 0x02,
  act_ab = 0x03,   // A → B activations
  act_bc = 0x04,   // B → C activations
  grad_cb = 0x05,  // C → B boundary gradient
  grad_ba = 0x06,  // B → A boundary gradient
  step_done = 0x07,
  bye = 0x08,
  error = 0x09,
  labels = 0x0a,  // single split only: the batch's labels travel to the server
};

enum class DType : std::uint8_t { f32 = 0x01, f64 = 0x02 };

std::string_view to_string(MsgType type);
std::optional<MsgType> msg_type_from_byte(std::uint8_t b);
/// True for the boundary-tensor messages and labels.
bool carries_tensor(MsgType type);
std::size_t element_size(DType dtype);

struct WireMessage {
  MsgType type = MsgType::bye;
  std::uint64_t step_id = 0;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const WireMessage&, const WireMessage&) = default;
};

std::vector<std::uint8_t> encode_tensor(const Tensor& t, DType dtype = DType::f32);
/// Inverse of encode_tensor; float32 elements widen to double. The buffer
/// must hold exactly one tensor.
Tensor decode_tensor(std::span<const std::uint8_t> bytes);
/// Bytes before the elements: 2 + 4·rank.
std::size_t tensor_header_size(std::size_t rank);
/// Element bytes inside an encoded tensor (its payload minus the header).
std::size_t tensor_data_bytes(std::span<const std::uint8_t> encoded);

std::vector<std::uint8_t> frame_message(const WireMessage& m);

struct FrameHeader {
  MsgType type;
  std::uint64_t step_id;
  std::uint32_t payload_len;
};

/// Validates magic, version, type and the payload limit.
FrameHeader parse_header(std::span<const std::uint8_t> header, std::uint32_t max_payload = kDefaultMaxPayload);

/// Parses exactly one frame from the front of `bytes`; `consumed` receives
/// its length. Throws FormatError on malformed or truncated input.
WireMessage parse_message(std::span<const std::uint8_t> bytes, std::size_t& consumed,
                          std::uint32_t max_payload = kDefaultMaxPayload);

/// Incremental parser for a byte stream arriving in arbitrary chunks.
class FrameParser {
 public:
  explicit FrameParser(std::uint32_t max_payload = kDefaultMaxPayload) : max_payload_(max_payload) {}
  void feed(std::span<const std::uint8_t> bytes);
  /// Next complete frame, if buffered. Any framing error is fatal.
  std::optional<WireMessage> next();
  std::size_t buffered() const noexcept { return buf_.size() - pos_; }

 private:
  std::uint32_t max_payload_;
  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

/// HELLO payload: what the client proposes for the session.
struct Hello {
  std::uint64_t plan_hash = 0;
  SplitMode mode = SplitMode::double_split;
  std::uint64_t seed = 0;
  double lr = 0.0;
  std::uint32_t batch_size = 0;
  DType precision = DType::f32;

  friend bool operator==(const Hello&, const Hello&) = default;
};

std::vector<std::uint8_t> encode_hello(const Hello& h);
Hello decode_hello(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_u64(std::uint64_t v);
std::uint64_t decode_u64(std::span<const std::uint8_t> bytes);

}  // namespace splitlearn::wire
