// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "splitlearn/tensor.hpp"

namespace splitlearn {

// Pure layer kernels. Image tensors are channels-last: H×W×C for a single
// sample or N×H×W×C for a batch. Convolution kernels are kh×kw×Cin×Cout.
// None of these functions mutate their inputs.

enum class Padding { valid, same };

struct ConvGeometry {
  std::size_t out_h = 0;
  std::size_t out_w = 0;
  std::size_t pad_top = 0;
  std::size_t pad_left = 0;
};

/// Output extent and leading padding for a 2-D window sweep.
/// valid: floor((H - kh) / stride) + 1; same: ceil(H / stride).
ConvGeometry conv_geometry(std::size_t h, std::size_t w, std::size_t kh, std::size_t kw, std::size_t stride,
                           Padding padding);

/// Shape inference for conv2d on an H×W×Cin sample with a kh×kw×Cin×Cout kernel.
Shape conv_out_shape(const Shape& input_hwc, const Shape& kernel, std::size_t stride, Padding padding);
/// Shape inference for maxpool on an H×W×C sample.
Shape pool_out_shape(const Shape& input_hwc, std::size_t window, std::size_t stride);

Tensor matmul(const Tensor& a, const Tensor& b);
/// aᵀ·b for a: K×M, b: K×N.
Tensor matmul_tn(const Tensor& a, const Tensor& b);
/// a·bᵀ for a: M×K, b: N×K.
Tensor matmul_nt(const Tensor& a, const Tensor& b);

Tensor conv2d(const Tensor& input, const Tensor& kernel, std::size_t stride, Padding padding);
Tensor conv2d_grad_input(const Tensor& grad_out, const Tensor& kernel, const Shape& input_shape, std::size_t stride,
                         Padding padding);
Tensor conv2d_grad_kernel(const Tensor& input, const Tensor& grad_out, const Shape& kernel_shape, std::size_t stride,
                          Padding padding);

struct PoolResult {
  Tensor output;
  /// Flat input index of the winning element for every output element.
  std::vector<std::size_t> argmax;
};

PoolResult maxpool(const Tensor& input, std::size_t window, std::size_t stride);
Tensor maxpool_grad_input(const Tensor& grad_out, const std::vector<std::size_t>& argmax, const Shape& input_shape);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
/// Adds a bias vector along the last axis.
Tensor add_bias(const Tensor& x, const Tensor& bias);
/// Sums over every axis except the last (bias gradients).
Tensor sum_to_last_axis(const Tensor& x);

Tensor relu(const Tensor& x);
/// Backward through ReLU given the forward output.
Tensor relu_grad(const Tensor& grad_out, const Tensor& out);
/// Softmax over the last axis, max-shifted.
Tensor softmax(const Tensor& x);
/// Backward through softmax given the forward output: p ⊙ (g − ⟨g, p⟩) per row.
Tensor softmax_grad(const Tensor& grad_out, const Tensor& out);

}  // namespace splitlearn
