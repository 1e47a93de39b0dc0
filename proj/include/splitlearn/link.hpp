// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <utility>

#include "splitlearn/transport.hpp"

namespace splitlearn {

enum class Direction { uplink, downlink };

/// Deterministic link cost: every send of n bytes takes
/// latency + n / bandwidth seconds. Uplink is client → server; the
/// downlink fields, when set, override the uplink values for the return path.
struct LinkModel {
  double latency_s = 0.0;
  double bandwidth_bytes_per_s = std::numeric_limits<double>::infinity();
  std::optional<double> downlink_latency_s;
  std::optional<double> downlink_bandwidth_bytes_per_s;

  static LinkModel ideal() { return {}; }
  /// Convenience for CLI units.
  static LinkModel from_ms_mbps(double latency_ms, double bandwidth_mbps);

  double transfer_seconds(std::size_t bytes, Direction dir = Direction::uplink) const;
  std::uint64_t transfer_ns(std::size_t bytes, Direction dir = Direction::uplink) const;
};

/// In-process duplex connection pair: {client end, server end}. Delivery is
/// FIFO and lossless; each send is charged to the link model and both ends
/// accumulate the modeled time of the traffic they see. No real delay is
/// injected.
std::pair<std::unique_ptr<Connection>, std::unique_ptr<Connection>> loopback_transport(const LinkModel& link);

}  // namespace splitlearn
