// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitlearn/wire.hpp"

#include <bit>
#include <cstring>
#include <limits>

#include "splitlearn/error.hpp"

namespace splitlearn::wire {

namespace {

constexpr std::uint8_t kMagic[4] = {'S', 'P', 'L', 'Z'};
constexpr std::size_t kHelloSize = 8 + 1 + 8 + 8 + 4 + 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

std::string_view to_string(MsgType type) {
  switch (type) {
    case MsgType::hello: return "HELLO";
    case MsgType::plan_ack: return "PLAN_ACK";
    case MsgType::act_ab: return "ACT_AB";
    case MsgType::act_bc: return "ACT_BC";
    case MsgType::grad_cb: return "GRAD_CB";
    case MsgType::grad_ba: return "GRAD_BA";
    case MsgType::step_done: return "STEP_DONE";
    case MsgType::bye: return "BYE";
    case MsgType::error: return "ERROR";
    case MsgType::labels: return "LABELS";
  }
  return "?";
}

std::optional<MsgType> msg_type_from_byte(std::uint8_t b) {
  if (b >= 0x01 && b <= 0x0a) return static_cast<MsgType>(b);
  return std::nullopt;
}

bool carries_tensor(MsgType type) {
  switch (type) {
    case MsgType::act_ab:
    case MsgType::act_bc:
    case MsgType::grad_cb:
    case MsgType::grad_ba:
    case MsgType::labels:
      return true;
    default:
      return false;
  }
}

std::size_t element_size(DType dtype) { return dtype == DType::f64 ? 8 : 4; }

std::size_t tensor_header_size(std::size_t rank) { return 2 + 4 * rank; }

std::vector<std::uint8_t> encode_tensor(const Tensor& t, DType dtype) {
  if (t.rank() == 0 || t.rank() > 255) throw DimensionError("tensor rank must be 1..255 on the wire");
  for (auto d : t.shape()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) {
      throw DimensionError("dimension " + std::to_string(d) + " does not fit in 32 bits");
    }
  }
  std::vector<std::uint8_t> out;
  out.reserve(tensor_header_size(t.rank()) + t.size() * element_size(dtype));
  out.push_back(static_cast<std::uint8_t>(dtype));
  out.push_back(static_cast<std::uint8_t>(t.rank()));
  for (auto d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
  if (dtype == DType::f32) {
    for (double v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  } else {
    for (double v : t.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2) throw FormatError("tensor: truncated header");
  const std::uint8_t tag = bytes[0];
  if (tag != static_cast<std::uint8_t>(DType::f32) && tag != static_cast<std::uint8_t>(DType::f64)) {
    throw FormatError("tensor: unknown dtype tag " + std::to_string(tag));
  }
  const DType dtype = static_cast<DType>(tag);
  const std::size_t rank = bytes[1];
  if (rank == 0) throw FormatError("tensor: rank 0");
  if (bytes.size() < tensor_header_size(rank)) throw FormatError("tensor: truncated dims");

  Shape shape(rank);
  std::uint64_t count = 1;
  const std::uint64_t max_count = bytes.size() / element_size(dtype);
  for (std::size_t i = 0; i < rank; ++i) {
    shape[i] = get_u32(bytes.data() + 2 + 4 * i);
    if (shape[i] == 0) throw FormatError("tensor: zero dimension");
    count *= shape[i];
    if (count > max_count) throw FormatError("tensor: length mismatch with dims");
  }
  const std::size_t need = tensor_header_size(rank) + count * element_size(dtype);
  if (bytes.size() != need) {
    throw FormatError("tensor: length mismatch, dims need " + std::to_string(need) + " bytes, buffer has " +
                      std::to_string(bytes.size()));
  }

  std::vector<double> data(count);
  const std::uint8_t* p = bytes.data() + tensor_header_size(rank);
  if (dtype == DType::f32) {
    for (std::size_t i = 0; i < count; ++i) data[i] = std::bit_cast<float>(get_u32(p + 4 * i));
  } else {
    for (std::size_t i = 0; i < count; ++i) data[i] = std::bit_cast<double>(get_u64(p + 8 * i));
  }
  return Tensor(std::move(shape), std::move(data));
}

std::size_t tensor_data_bytes(std::span<const std::uint8_t> encoded) {
  if (encoded.size() < 2) throw FormatError("tensor: truncated header");
  const std::size_t header = tensor_header_size(encoded[1]);
  if (encoded.size() < header) throw FormatError("tensor: truncated dims");
  return encoded.size() - header;
}

std::vector<std::uint8_t> frame_message(const WireMessage& m) {
  if (!msg_type_from_byte(static_cast<std::uint8_t>(m.type))) throw FormatError("unknown message type");
  if (carries_tensor(m.type) && m.payload.size() < 2) {
    throw FormatError(std::string(to_string(m.type)) + " must carry a tensor payload");
  }
  if ((m.type == MsgType::step_done || m.type == MsgType::bye) && !m.payload.empty()) {
    throw FormatError(std::string(to_string(m.type)) + " carries no payload");
  }
  if (m.payload.size() > std::numeric_limits<std::uint32_t>::max()) throw FormatError("payload exceeds 4 GiB");
  std::vector<std::uint8_t> out(kHeaderSize + m.payload.size());
  std::memcpy(out.data(), kMagic, 4);
  out[4] = kVersion;
  out[5] = static_cast<std::uint8_t>(m.type);
  const auto len = static_cast<std::uint32_t>(m.payload.size());
  for (int i = 0; i < 8; ++i) out[6 + i] = static_cast<std::uint8_t>(m.step_id >> (8 * i));
  for (int i = 0; i < 4; ++i) out[14 + i] = static_cast<std::uint8_t>(len >> (8 * i));
  if (!m.payload.empty()) std::memcpy(out.data() + kHeaderSize, m.payload.data(), m.payload.size());
  return out;
}

FrameHeader parse_header(std::span<const std::uint8_t> h, std::uint32_t max_payload) {
  if (h.size() < kHeaderSize) throw FormatError("frame: truncated header");
  if (std::memcmp(h.data(), kMagic, 4) != 0) throw FormatError("frame: bad magic");
  if (h[4] != kVersion) throw FormatError("frame: unsupported version " + std::to_string(h[4]));
  const auto type = msg_type_from_byte(h[5]);
  if (!type) throw FormatError("frame: unknown message type " + std::to_string(h[5]));
  FrameHeader fh{*type, get_u64(h.data() + 6), get_u32(h.data() + 14)};
  if (fh.payload_len > max_payload) {
    throw FormatError("frame: payload of " + std::to_string(fh.payload_len) + " bytes exceeds limit " +
                      std::to_string(max_payload));
  }
  if (carries_tensor(fh.type) && fh.payload_len < 2) throw FormatError("frame: tensor message without tensor");
  if ((fh.type == MsgType::step_done || fh.type == MsgType::bye) && fh.payload_len != 0) {
    throw FormatError("frame: control message with payload");
  }
  return fh;
}

WireMessage parse_message(std::span<const std::uint8_t> bytes, std::size_t& consumed, std::uint32_t max_payload) {
  const FrameHeader fh = parse_header(bytes, max_payload);
  if (bytes.size() - kHeaderSize < fh.payload_len) throw FormatError("frame: truncated payload");
  WireMessage m;
  m.type = fh.type;
  m.step_id = fh.step_id;
  m.payload.assign(bytes.begin() + kHeaderSize, bytes.begin() + static_cast<std::ptrdiff_t>(kHeaderSize + fh.payload_len));
  consumed = kHeaderSize + fh.payload_len;
  return m;
}

void FrameParser::feed(std::span<const std::uint8_t> bytes) {
  if (pos_ > 0 && pos_ == buf_.size()) {
    buf_.clear();
    pos_ = 0;
  }
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

std::optional<WireMessage> FrameParser::next() {
  const std::span<const std::uint8_t> rest(buf_.data() + pos_, buf_.size() - pos_);
  if (rest.size() < kHeaderSize) return std::nullopt;
  const FrameHeader fh = parse_header(rest, max_payload_);
  if (rest.size() - kHeaderSize < fh.payload_len) return std::nullopt;
  std::size_t used = 0;
  WireMessage m = parse_message(rest, used, max_payload_);
  pos_ += used;
  return m;
}

std::vector<std::uint8_t> encode_hello(const Hello& h) {
  std::vector<std::uint8_t> out;
  out.reserve(kHelloSize);
  put_u64(out, h.plan_hash);
  out.push_back(static_cast<std::uint8_t>(h.mode));
  put_u64(out, h.seed);
  put_u64(out, std::bit_cast<std::uint64_t>(h.lr));
  put_u32(out, h.batch_size);
  out.push_back(static_cast<std::uint8_t>(h.precision));
  return out;
}

Hello decode_hello(std::span<const std::uint8_t> b) {
  if (b.size() != kHelloSize) throw FormatError("HELLO: expected " + std::to_string(kHelloSize) + " bytes");
  Hello h;
  h.plan_hash = get_u64(b.data());
  if (b[8] > 2) throw FormatError("HELLO: bad split mode");
  h.mode = static_cast<SplitMode>(b[8]);
  h.seed = get_u64(b.data() + 9);
  h.lr = std::bit_cast<double>(get_u64(b.data() + 17));
  h.batch_size = get_u32(b.data() + 25);
  if (b[29] != 0x01 && b[29] != 0x02) throw FormatError("HELLO: bad precision tag");
  h.precision = static_cast<DType>(b[29]);
  return h;
}

std::vector<std::uint8_t> encode_u64(std::uint64_t v) {
  std::vector<std::uint8_t> out;
  put_u64(out, v);
  return out;
}

std::uint64_t decode_u64(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != 8) throw FormatError("expected an 8-byte integer");
  return get_u64(bytes.data());
}

}  // namespace splitlearn::wire
