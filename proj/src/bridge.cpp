// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitlearn/bridge.hpp"

#include "splitlearn/error.hpp"
#include "splitlearn/kernels.hpp"

namespace splitlearn {

namespace {

double half_sum_squares(const Tensor& c, const AuxiliaryTarget& target) {
  if (c.shape() != target.tensor().shape()) {
    throw DimensionError("auxiliary loss: output " + to_string(c.shape()) + " vs target " +
                         to_string(target.tensor().shape()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double r = target.tensor()[i] - c[i];
    sum += r * r;
  }
  return 0.5 * sum;
}

}  // namespace

AuxiliaryTarget make_auxiliary_target(const Tensor& c, const BoundaryGradient& g) {
  if (c.shape() != g.tensor.shape()) {
    throw ProtocolError("boundary gradient " + to_string(g.tensor.shape()) + " does not match cached output " +
                        to_string(c.shape()) + " (lost or reordered step?)");
  }
  AuxiliaryTarget t;
  t.target_ = add(c, g.tensor);
  t.residual_ = g.tensor;
  return t;
}

double auxiliary_loss(const Tensor& c, const AuxiliaryTarget& target) { return half_sum_squares(c, target); }

double auxiliary_loss_mean(const Tensor& c, const AuxiliaryTarget& target) {
  return half_sum_squares(c, target) / static_cast<double>(c.dim(0));
}

BackwardResult auxiliary_backward(const Segment& segment, ForwardCache&& cache, const BoundaryGradient& g,
                                  AuxReduction reduction) {
  if (segment.role() != SegmentRole::A && segment.role() != SegmentRole::B) {
    throw StateError("auxiliary_backward is for label-less segments, got role " + std::string(to_string(segment.role())));
  }
  if (!cache.valid()) throw StateError("forward cache already consumed or never filled");
  if (g.step_id != cache.step_id()) {
    throw ProtocolError("boundary gradient for step " + std::to_string(g.step_id) + " applied to cache of step " +
                        std::to_string(cache.step_id()));
  }
  const AuxiliaryTarget target = make_auxiliary_target(cache.output(), g);

  // ∂L_B/∂c = ĉ − c under RSSE, (ĉ − c)/N under the mean reduction.
  Tensor seed = target.residual();
  if (reduction == AuxReduction::mean) seed = scale(seed, 1.0 / static_cast<double>(cache.batch_size()));
  return detail::reverse_sweep(segment, std::move(cache), seed);
}

}  // namespace splitlearn
