// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "splitlearn/tensor.hpp"
#include "splitlearn/wire.hpp"

namespace splitlearn {

/// Per-step cost breakdown. transfer_ns is modeled when the transport
/// simulates a link and measured (time blocked in send/recv) otherwise.
struct TimingRecord {
  std::uint64_t step_id = 0;
  std::uint64_t compute_ns = 0;
  std::uint64_t client_compute_ns = 0;
  std::uint64_t server_compute_ns = 0;
  std::uint64_t serialize_ns = 0;
  std::uint64_t transfer_ns = 0;
  /// Measured wall time of the step on the reporting side.
  std::uint64_t wall_ns = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;

  std::uint64_t total_ns() const noexcept { return compute_ns + serialize_ns + transfer_ns; }
};

/// One tensor-bearing frame as seen by the accountant.
struct TensorTraffic {
  wire::MsgType type;
  bool outbound = false;
  std::uint64_t step_id = 0;
  Shape shape;
  /// Element bytes only; tensor and frame headers are excluded.
  std::size_t data_bytes = 0;
  std::size_t frame_bytes = 0;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  std::uint64_t elapsed_ns() const {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start_).count());
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace splitlearn
