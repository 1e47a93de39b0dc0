// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "splitlearn/kernels.hpp"
#include "splitlearn/rng.hpp"
#include "splitlearn/tensor.hpp"

namespace splitlearn {

enum class LayerKind { dense, conv2d, maxpool, flatten };
enum class Activation { identity, relu, softmax };

/// One (weights, bias, activation) triple, or a parameter-free reshaping
/// layer. Shapes here are per sample; the batch axis is implicit.
struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::size_t units = 0;    // dense
  std::size_t filters = 0;  // conv2d
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t window = 0;  // maxpool
  std::size_t stride = 1;
  Padding padding = Padding::valid;
  Activation activation = Activation::identity;

  static LayerSpec dense(std::size_t units, Activation act = Activation::identity);
  static LayerSpec conv(std::size_t filters, std::size_t kernel, std::size_t stride, Padding padding,
                        Activation act = Activation::identity);
  static LayerSpec pool(std::size_t window, std::size_t stride);
  static LayerSpec flat();

  bool has_params() const noexcept { return kind == LayerKind::dense || kind == LayerKind::conv2d; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

std::string_view to_string(LayerKind kind);
std::string_view to_string(Activation act);
std::string_view to_string(Padding padding);

/// Per-sample output shape; throws DimensionError when the input does not fit.
Shape layer_output_shape(const LayerSpec& layer, const Shape& input);

/// Parameter shapes: {W, b} for dense (in×units, units) and conv2d
/// (kh×kw×Cin×filters, filters); empty for maxpool and flatten.
std::vector<Shape> param_shapes(const LayerSpec& layer, const Shape& input);

/// Uniform init with limit sqrt(6 / fan_in) for ReLU layers and
/// sqrt(6 / (fan_in + fan_out)) otherwise; biases zero.
std::vector<Tensor> init_params(const LayerSpec& layer, const Shape& input, Rng& rng);

/// The stream a plan's layer at `layer_index` draws its parameters from.
/// Lets each party initialize only its own layers and still agree with
/// a monolithic model built from the same seed.
Rng layer_rng(std::uint64_t seed, std::size_t layer_index);

}  // namespace splitlearn
