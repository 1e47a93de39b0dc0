// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "splitlearn/tensor.hpp"

namespace splitlearn {

enum class LossKind { mse, cross_entropy };

std::string_view to_string(LossKind kind);

struct LossResult {
  double loss = 0.0;
  Tensor grad;  // ∂loss/∂prediction
};

/// Mean-over-batch losses; the batch is the leading axis of `prediction`.
///
///   mse:            (1/B) Σ_b ½ Σ_j (p_bj − t_bj)²,   grad (p − t) / B
///   cross_entropy:  −(1/B) Σ_b Σ_k t_bk log p_bk,     grad −t / (B p)
///
/// For cross-entropy `prediction` must hold probability rows (B×K) and
/// `target` is either one-hot B×K or a length-B vector of class indices.
LossResult loss_and_grad(LossKind kind, const Tensor& prediction, const Tensor& target);

/// Labels → loss target: class indices for cross-entropy, one-hot rows for mse.
Tensor make_target(LossKind kind, std::span<const std::size_t> labels, std::size_t n_outputs);

/// Number of rows whose arg-max matches the label.
std::size_t count_correct(const Tensor& prediction, std::span<const std::size_t> labels);

}  // namespace splitlearn
