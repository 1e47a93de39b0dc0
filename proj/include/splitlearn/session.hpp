// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "splitlearn/channel.hpp"
#include "splitlearn/plan.hpp"
#include "splitlearn/segment.hpp"
#include "splitlearn/timing.hpp"
#include "splitlearn/transport.hpp"
#include "splitlearn/wire.hpp"

namespace splitlearn {

struct SessionOptions {
  HyperParams hp;
  std::uint64_t seed = 0;
  wire::DType precision = wire::DType::f32;
  std::uint32_t max_payload = wire::kDefaultMaxPayload;
};

struct TrainState {
  std::uint64_t epoch = 0;
  std::uint64_t step = 0;
  std::vector<TimingRecord> timings;
  /// Per-step loss as known on this side (NaN where the loss lives on the peer).
  std::vector<double> losses;
  std::size_t correct = 0;
  std::size_t seen = 0;
  /// Tensor element bytes moved in either direction.
  std::uint64_t tensor_bytes = 0;
  bool clean_shutdown = true;
  std::string diagnostic;

  double running_loss() const;
  double accuracy() const { return seen ? static_cast<double>(correct) / static_cast<double>(seen) : 0.0; }
};

struct StepOutcome {
  std::optional<double> loss;
  std::size_t correct = 0;
  TimingRecord timing;
  std::vector<TensorTraffic> traffic;
  std::uint64_t control_frames = 0;
};

/// The device side: segment A (raw inputs) and, in double-split mode,
/// segment C (labels). Drives the lockstep exchange one step at a time.
///
/// Double split, per step:
///   A.forward → ACT_AB → (server: B.forward) → ACT_BC → C.forward, loss,
///   C.backward, C.sgd → GRAD_CB → (server: B bridge + sgd) → GRAD_BA →
///   A bridge + sgd → STEP_DONE
///
/// Single split: A.forward → ACT_AB, LABELS → GRAD_BA → A bridge + sgd →
/// STEP_DONE. The server holds the tail and the loss.
class ClientSession {
 public:
  ClientSession(Connection& conn, const SplitPlan& plan, SessionOptions opts);
  /// Explicit segments, e.g. with hand-set parameters.
  ClientSession(Connection& conn, const SplitPlan& plan, Segment head, std::optional<Segment> tail,
                SessionOptions opts);

  void handshake();
  StepOutcome step(const Tensor& inputs, std::span<const std::size_t> labels);
  StepOutcome step_double(const Tensor& inputs, std::span<const std::size_t> labels);
  StepOutcome step_single(const Tensor& inputs, std::span<const std::size_t> labels);
  /// BYE, then close.
  void finish();
  /// ERROR frame, then close. Never throws.
  void abort(const std::string& why) noexcept;

  SplitMode mode() const noexcept { return mode_; }
  const Segment& head() const noexcept { return head_; }
  const Segment* tail() const noexcept { return tail_ ? &*tail_ : nullptr; }
  std::uint64_t steps_done() const noexcept { return step_; }
  const Channel& channel() const noexcept { return channel_; }

 private:
  struct Mark {
    ChannelStats stats;
    std::uint64_t transfer_ns;
  };
  Mark mark() const { return {channel_.stats(), channel_.transfer_ns()}; }
  void close_out(StepOutcome& out, const Mark& before, std::uint64_t compute_ns, const Stopwatch& wall);

  Connection& conn_;
  SplitPlan plan_;
  SplitMode mode_;
  SessionOptions opts_;
  Segment head_;
  std::optional<Segment> tail_;
  Channel channel_;
  std::uint64_t plan_hash_;
  std::uint64_t step_ = 0;
  bool handshaken_ = false;
};

using ServerObserver = std::function<void(std::uint64_t step_id, const Segment& segment)>;

/// The server side: segment B in double-split mode (sees only boundary
/// tensors), or the label-holding tail in single-split mode.
class ServerSession {
 public:
  ServerSession(Connection& conn, const SplitPlan& plan, std::uint64_t seed,
                std::uint32_t max_payload = wire::kDefaultMaxPayload);
  ServerSession(Connection& conn, const SplitPlan& plan, Segment segment, std::uint64_t seed,
                std::uint32_t max_payload = wire::kDefaultMaxPayload);

  /// Handshake, then serve steps until BYE. Errors are reported to the
  /// peer with an ERROR frame before being rethrown.
  TrainState run(const ServerObserver& observer = {});

  const Segment& segment() const noexcept { return segment_; }
  SplitMode mode() const noexcept { return mode_; }
  /// Every message type this side has received, in order.
  const std::vector<wire::MsgType>& received_types() const noexcept { return received_; }
  const Channel& channel() const noexcept { return channel_; }

 private:
  wire::Hello handshake();
  /// Returns false when the peer ended the session.
  bool serve_step(TrainState& state, const ServerObserver& observer);
  wire::WireMessage recv_tracked();

  Connection& conn_;
  SplitPlan plan_;
  SplitMode mode_;
  std::uint64_t seed_;
  Segment segment_;
  Channel channel_;
  HyperParams hp_;
  wire::DType precision_ = wire::DType::f32;
  std::vector<wire::MsgType> received_;
};

}  // namespace splitlearn
