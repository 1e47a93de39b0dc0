// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "splitlearn/layer.hpp"
#include "splitlearn/tensor.hpp"

namespace splitlearn {

/// Which party a segment plays. A holds raw inputs, C holds labels,
/// B sees neither. A monolithic segment is the whole, unsplit network.
enum class SegmentRole { A, B, C, monolithic };

std::string_view to_string(SegmentRole role);

/// A contiguous run of a plan's layers plus the per-sample shape feeding it.
struct SegmentSpec {
  std::vector<LayerSpec> layers;
  Shape input_shape;
  /// Index of layers[0] within the full plan; selects the init streams.
  std::size_t first_layer = 0;

  /// Per-sample output shape of every layer; validates the chain.
  std::vector<Shape> output_shapes() const;
  Shape output_shape() const;
};

using LayerParams = std::vector<Tensor>;
using ParamGrads = std::vector<std::vector<Tensor>>;

struct HyperParams {
  double lr = 0.01;
  std::size_t batch_size = 1;
};

class Segment;

/// Activations recorded by one forward pass. Valid for exactly one
/// backward pass: backward consumes it, and moving from a cache leaves the
/// source consumed.
class ForwardCache {
 public:
  ForwardCache() = default;
  ForwardCache(ForwardCache&& other) noexcept;
  ForwardCache& operator=(ForwardCache&& other) noexcept;
  ForwardCache(const ForwardCache&) = delete;
  ForwardCache& operator=(const ForwardCache&) = delete;

  bool valid() const noexcept { return valid_; }
  std::size_t batch_size() const noexcept { return batch_; }
  std::uint64_t step_id() const noexcept { return step_id_; }
  const Tensor& output() const { return outputs_.back(); }

 private:
  friend class Segment;
  friend struct SweepAccess;

  bool valid_ = false;
  std::uint64_t segment_id_ = 0;
  std::uint64_t version_ = 0;
  std::uint64_t step_id_ = 0;
  std::size_t batch_ = 0;
  std::vector<Tensor> inputs_;
  std::vector<Tensor> outputs_;
  std::vector<std::vector<std::size_t>> argmax_;
};

struct ForwardResult {
  Tensor output;
  ForwardCache cache;
};

struct BackwardResult {
  ParamGrads param_grads;
  Tensor grad_input;
};

/// An ordered stack of layers with its parameters.
///
/// Inputs and outputs carry a leading batch axis. Copies get a fresh
/// identity, so a cache made by one copy is rejected by the other.
class Segment {
 public:
  Segment(SegmentSpec spec, SegmentRole role, std::uint64_t seed);
  Segment(SegmentSpec spec, SegmentRole role, std::vector<LayerParams> params);

  Segment(const Segment& other);
  Segment& operator=(const Segment& other);
  Segment(Segment&&) noexcept = default;
  Segment& operator=(Segment&&) noexcept = default;

  ForwardResult forward(const Tensor& input, std::uint64_t step_id = 0) const;

  SegmentRole role() const noexcept { return role_; }
  const SegmentSpec& spec() const noexcept { return spec_; }
  const std::vector<LayerParams>& params() const noexcept { return params_; }
  std::size_t param_count() const;
  /// Bumped by every sgd_step; caches from older versions are stale.
  std::uint64_t version() const noexcept { return version_; }
  Shape output_shape() const { return out_shapes_.back(); }

 private:
  friend struct SweepAccess;
  friend void sgd_step(Segment& segment, const ParamGrads& grads, const HyperParams& hp);

  void check_params() const;

  SegmentSpec spec_;
  SegmentRole role_;
  std::vector<Shape> in_shapes_;
  std::vector<Shape> out_shapes_;
  std::vector<LayerParams> params_;
  std::uint64_t id_;
  std::uint64_t version_ = 0;
};

/// Backward pass seeded by the gradient of a loss the caller holds. Only
/// segments that see labels (role C or monolithic) may call this.
BackwardResult backward_from_loss(const Segment& segment, ForwardCache&& cache, const Tensor& grad_wrt_output);

/// p ← p − η·g for every parameter.
void sgd_step(Segment& segment, const ParamGrads& grads, const HyperParams& hp);

namespace detail {
/// Role-agnostic reverse sweep shared by backward_from_loss and the
/// auxiliary-target bridge.
BackwardResult reverse_sweep(const Segment& segment, ForwardCache&& cache, const Tensor& seed);
}  // namespace detail

}  // namespace splitlearn
