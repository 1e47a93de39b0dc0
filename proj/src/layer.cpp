// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitlearn/layer.hpp"

#include <cmath>

#include "splitlearn/error.hpp"

namespace splitlearn {

LayerSpec LayerSpec::dense(std::size_t units, Activation act) {
  LayerSpec l;
  l.kind = LayerKind::dense;
  l.units = units;
  l.activation = act;
  return l;
}

LayerSpec LayerSpec::conv(std::size_t filters, std::size_t kernel, std::size_t stride, Padding padding, Activation act) {
  LayerSpec l;
  l.kind = LayerKind::conv2d;
  l.filters = filters;
  l.kernel_h = kernel;
  l.kernel_w = kernel;
  l.stride = stride;
  l.padding = padding;
  l.activation = act;
  return l;
}

LayerSpec LayerSpec::pool(std::size_t window, std::size_t stride) {
  LayerSpec l;
  l.kind = LayerKind::maxpool;
  l.window = window;
  l.stride = stride;
  return l;
}

LayerSpec LayerSpec::flat() {
  LayerSpec l;
  l.kind = LayerKind::flatten;
  return l;
}

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::flatten: return "flatten";
  }
  return "?";
}

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::softmax: return "softmax";
  }
  return "?";
}

std::string_view to_string(Padding padding) { return padding == Padding::same ? "same" : "valid"; }

Shape layer_output_shape(const LayerSpec& layer, const Shape& input) {
  switch (layer.kind) {
    case LayerKind::dense:
      if (input.size() != 1) throw DimensionError("dense layer needs a flat input, got " + to_string(input));
      if (layer.units == 0) throw DimensionError("dense layer needs units > 0");
      return {layer.units};
    case LayerKind::conv2d:
      if (layer.filters == 0) throw DimensionError("conv2d layer needs filters > 0");
      if (input.size() != 3) throw DimensionError("conv2d layer needs an H×W×C input, got " + to_string(input));
      return conv_out_shape(input, {layer.kernel_h, layer.kernel_w, input[2], layer.filters}, layer.stride,
                            layer.padding);
    case LayerKind::maxpool:
      return pool_out_shape(input, layer.window, layer.stride);
    case LayerKind::flatten:
      return {element_count(input)};
  }
  throw DimensionError("unknown layer kind");
}

std::vector<Shape> param_shapes(const LayerSpec& layer, const Shape& input) {
  layer_output_shape(layer, input);
  switch (layer.kind) {
    case LayerKind::dense:
      return {{input[0], layer.units}, {layer.units}};
    case LayerKind::conv2d:
      return {{layer.kernel_h, layer.kernel_w, input[2], layer.filters}, {layer.filters}};
    default:
      return {};
  }
}

std::vector<Tensor> init_params(const LayerSpec& layer, const Shape& input, Rng& rng) {
  const auto shapes = param_shapes(layer, input);
  if (shapes.empty()) return {};
  const Shape& w = shapes[0];
  std::size_t fan_in = 0, fan_out = 0;
  if (layer.kind == LayerKind::dense) {
    fan_in = w[0];
    fan_out = w[1];
  } else {
    fan_in = w[0] * w[1] * w[2];
    fan_out = w[0] * w[1] * w[3];
  }
  const double limit = layer.activation == Activation::relu ? std::sqrt(6.0 / static_cast<double>(fan_in))
                                                            : std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor weights(w);
  for (auto& v : weights.data()) v = rng.uniform(-limit, limit);
  return {std::move(weights), Tensor(shapes[1])};
}

Rng layer_rng(std::uint64_t seed, std::size_t layer_index) { return Rng::for_stream(seed, layer_index); }

}  // namespace splitlearn
