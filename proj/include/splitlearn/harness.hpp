// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "splitlearn/dataset.hpp"
#include "splitlearn/link.hpp"
#include "splitlearn/plan.hpp"
#include "splitlearn/segment.hpp"
#include "splitlearn/session.hpp"
#include "splitlearn/timing.hpp"

namespace splitlearn {

/// Every parameter of a segment, layer by layer, in storage order.
std::vector<double> flatten_params(const Segment& segment);

/// Steps per epoch for a dataset; the trailing partial batch is dropped.
std::size_t steps_per_epoch(std::size_t n_samples, std::size_t batch_size);

/// First sample of zero-based step i under the fixed, unshuffled order.
std::size_t batch_start(std::size_t step_index, std::size_t n_samples, std::size_t batch_size);

struct StepResult {
  double loss = 0.0;
  std::size_t correct = 0;
  std::uint64_t compute_ns = 0;
};

/// The unsplit network trained on one machine; the reference every split
/// run is compared against.
class MonolithicTrainer {
 public:
  MonolithicTrainer(const SplitPlan& plan, HyperParams hp, std::uint64_t seed);

  StepResult step(const Tensor& inputs, std::span<const std::size_t> labels);
  double evaluate_loss(const Tensor& inputs, std::span<const std::size_t> labels) const;

  const Segment& model() const noexcept { return model_; }
  std::uint64_t steps_done() const noexcept { return step_; }

 private:
  SplitPlan plan_;
  HyperParams hp_;
  Segment model_;
  std::uint64_t step_ = 0;
};

struct TrainRun {
  std::vector<double> losses;
  std::vector<TimingRecord> timings;
  std::size_t correct = 0;
  std::size_t seen = 0;
  /// weights[i] is the flattened model after i steps (weights[0] is the
  /// initial model). Filled only when requested.
  std::vector<std::vector<double>> weights;
};

TrainRun monolithic_train(const SplitPlan& plan, const Dataset& data, const HyperParams& hp, std::uint64_t seed,
                          std::size_t n_steps, bool record_weights = false);

struct SimulationOptions {
  LinkModel link;
  wire::DType precision = wire::DType::f32;
  bool record_weights = false;
};

struct SimulationResult {
  TrainRun run;
  /// Tensor frames of every step as seen by the client.
  std::vector<std::vector<TensorTraffic>> traffic;
  std::vector<std::uint64_t> control_frames;
  TrainState server;
};

/// Client and server sessions over an in-process loopback link, the server
/// on its own thread. Timing records merge both sides: compute splits into
/// client and server parts and the loss comes from whichever side holds it.
SimulationResult simulate_split(const SplitPlan& plan, const Dataset& data, const HyperParams& hp, std::uint64_t seed,
                                std::size_t n_steps, const SimulationOptions& opts = {});

struct EquivalenceReport {
  /// max over steps and parameters of |w_split − w_mono|.
  double max_divergence = 0.0;
  std::vector<double> per_step;
  std::vector<double> split_losses;
  std::vector<double> mono_losses;
};

/// Trains the plan split and unsplit from the same seed and data order,
/// the split side in 64-bit wire precision, and compares weights per step.
EquivalenceReport equivalence_check(const SplitPlan& plan, const Dataset& data, const HyperParams& hp,
                                    std::uint64_t seed, std::size_t n_steps);

struct SweepRow {
  std::vector<std::size_t> cuts;
  bool skipped = false;
  std::string reason;
  /// Per-sample elements crossing the first cut.
  std::size_t boundary_elements = 0;
  /// Per-step means.
  double client_compute_ns = 0.0;
  double server_compute_ns = 0.0;
  double serialize_ns = 0.0;
  double transfer_ns = 0.0;
  double total_ns = 0.0;
};

/// Re-cuts one plan at each candidate and measures a few steps per cut.
/// Candidates the plan rejects yield a skipped row with the reason.
std::vector<SweepRow> split_location_sweep(const SplitPlan& plan, const std::vector<std::vector<std::size_t>>& candidates,
                                           const LinkModel& link, const Dataset& data, const HyperParams& hp,
                                           std::uint64_t seed, std::size_t n_steps);

}  // namespace splitlearn
