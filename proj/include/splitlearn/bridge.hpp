// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "splitlearn/segment.hpp"
#include "splitlearn/tensor.hpp"

namespace splitlearn {

/// ∂L/∂c for a segment's output c, as received from the downstream party.
struct BoundaryGradient {
  Tensor tensor;
  std::uint64_t step_id = 0;
};

/// The fabricated label ĉ = c + ∂L/∂c.
///
/// Floating-point addition is not invertible, so (ĉ − c) can differ from
/// the received gradient in the last bit. The exact gradient is kept as
/// the residual and is what the backward sweep is seeded with.
class AuxiliaryTarget {
 public:
  const Tensor& tensor() const noexcept { return target_; }
  const Tensor& residual() const noexcept { return residual_; }

 private:
  friend AuxiliaryTarget make_auxiliary_target(const Tensor& c, const BoundaryGradient& g);
  Tensor target_;
  Tensor residual_;
};

/// ĉ = c + g elementwise. A shape mismatch means the two parties are
/// looking at different steps and raises ProtocolError.
AuxiliaryTarget make_auxiliary_target(const Tensor& c, const BoundaryGradient& g);

/// ½ Σ (ĉ − c)², summed over the whole batch with no 1/N.
double auxiliary_loss(const Tensor& c, const AuxiliaryTarget& target);

/// ½ Σ (ĉ − c)² / N with N the batch size; kept to show the 1/N shrinkage.
double auxiliary_loss_mean(const Tensor& c, const AuxiliaryTarget& target);

enum class AuxReduction { rsse, mean };

/// Backward pass of a label-less segment (role A or B) driven by the
/// auxiliary loss built from `g`. With the RSSE reduction the parameter
/// gradients equal what an unsplit network would compute for the same
/// layers; grad_input is the boundary gradient to pass further upstream.
BackwardResult auxiliary_backward(const Segment& segment, ForwardCache&& cache, const BoundaryGradient& g,
                                  AuxReduction reduction = AuxReduction::rsse);

}  // namespace splitlearn
