// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitlearn/segment.hpp"

#include <atomic>
#include <cmath>

#include "splitlearn/error.hpp"

namespace splitlearn {

namespace {

std::uint64_t next_segment_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

Shape batched(std::size_t batch, const Shape& sample) {
  Shape s{batch};
  s.insert(s.end(), sample.begin(), sample.end());
  return s;
}

Tensor activate(Activation act, const Tensor& x) {
  switch (act) {
    case Activation::relu: return relu(x);
    case Activation::softmax: return softmax(x);
    case Activation::identity: break;
  }
  return x;
}

Tensor activation_grad(Activation act, const Tensor& grad_out, const Tensor& out) {
  switch (act) {
    case Activation::relu: return relu_grad(grad_out, out);
    case Activation::softmax: return softmax_grad(grad_out, out);
    case Activation::identity: break;
  }
  return grad_out;
}

}  // namespace

std::string_view to_string(SegmentRole role) {
  switch (role) {
    case SegmentRole::A: return "A";
    case SegmentRole::B: return "B";
    case SegmentRole::C: return "C";
    case SegmentRole::monolithic: return "monolithic";
  }
  return "?";
}

std::vector<Shape> SegmentSpec::output_shapes() const {
  if (layers.empty()) throw DimensionError("segment has no layers");
  std::vector<Shape> shapes;
  Shape cur = input_shape;
  for (const auto& layer : layers) {
    cur = layer_output_shape(layer, cur);
    shapes.push_back(cur);
  }
  return shapes;
}

Shape SegmentSpec::output_shape() const { return output_shapes().back(); }

ForwardCache::ForwardCache(ForwardCache&& other) noexcept
    : valid_(other.valid_),
      segment_id_(other.segment_id_),
      version_(other.version_),
      step_id_(other.step_id_),
      batch_(other.batch_),
      inputs_(std::move(other.inputs_)),
      outputs_(std::move(other.outputs_)),
      argmax_(std::move(other.argmax_)) {
  other.valid_ = false;
}

ForwardCache& ForwardCache::operator=(ForwardCache&& other) noexcept {
  if (this != &other) {
    valid_ = other.valid_;
    segment_id_ = other.segment_id_;
    version_ = other.version_;
    step_id_ = other.step_id_;
    batch_ = other.batch_;
    inputs_ = std::move(other.inputs_);
    outputs_ = std::move(other.outputs_);
    argmax_ = std::move(other.argmax_);
    other.valid_ = false;
  }
  return *this;
}

Segment::Segment(SegmentSpec spec, SegmentRole role, std::uint64_t seed)
    : spec_(std::move(spec)), role_(role), id_(next_segment_id()) {
  out_shapes_ = spec_.output_shapes();
  in_shapes_.push_back(spec_.input_shape);
  in_shapes_.insert(in_shapes_.end(), out_shapes_.begin(), out_shapes_.end() - 1);
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    Rng rng = layer_rng(seed, spec_.first_layer + i);
    params_.push_back(init_params(spec_.layers[i], in_shapes_[i], rng));
  }
}

Segment::Segment(SegmentSpec spec, SegmentRole role, std::vector<LayerParams> params)
    : spec_(std::move(spec)), role_(role), params_(std::move(params)), id_(next_segment_id()) {
  out_shapes_ = spec_.output_shapes();
  in_shapes_.push_back(spec_.input_shape);
  in_shapes_.insert(in_shapes_.end(), out_shapes_.begin(), out_shapes_.end() - 1);
  check_params();
}

Segment::Segment(const Segment& other)
    : spec_(other.spec_),
      role_(other.role_),
      in_shapes_(other.in_shapes_),
      out_shapes_(other.out_shapes_),
      params_(other.params_),
      id_(next_segment_id()),
      version_(other.version_) {}

Segment& Segment::operator=(const Segment& other) {
  if (this != &other) {
    Segment copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void Segment::check_params() const {
  if (params_.size() != spec_.layers.size()) {
    throw DimensionError("segment has " + std::to_string(spec_.layers.size()) + " layers but " +
                         std::to_string(params_.size()) + " parameter groups");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto shapes = param_shapes(spec_.layers[i], in_shapes_[i]);
    if (shapes.size() != params_[i].size()) throw DimensionError("layer " + std::to_string(i) + ": wrong parameter count");
    for (std::size_t j = 0; j < shapes.size(); ++j) {
      if (params_[i][j].shape() != shapes[j]) {
        throw DimensionError("layer " + std::to_string(i) + ": parameter shape " + to_string(params_[i][j].shape()) +
                             " does not match " + to_string(shapes[j]));
      }
    }
  }
}

std::size_t Segment::param_count() const {
  std::size_t n = 0;
  for (const auto& group : params_) {
    for (const auto& p : group) n += p.size();
  }
  return n;
}

ForwardResult Segment::forward(const Tensor& input, std::uint64_t step_id) const {
  if (input.rank() != spec_.input_shape.size() + 1) {
    throw DimensionError("segment expects input " + to_string(batched(0, spec_.input_shape)) + " with a batch axis, got " +
                         to_string(input.shape()));
  }
  const std::size_t batch = input.dim(0);
  if (input.shape() != batched(batch, spec_.input_shape)) {
    throw DimensionError("segment expects input " + to_string(batched(batch, spec_.input_shape)) + ", got " +
                         to_string(input.shape()));
  }

  ForwardCache cache;
  cache.segment_id_ = id_;
  cache.version_ = version_;
  cache.step_id_ = step_id;
  cache.batch_ = batch;
  cache.argmax_.resize(spec_.layers.size());

  Tensor cur = input;
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerSpec& layer = spec_.layers[i];
    Tensor next;
    switch (layer.kind) {
      case LayerKind::dense:
        next = add_bias(matmul(cur, params_[i][0]), params_[i][1]);
        break;
      case LayerKind::conv2d:
        next = add_bias(conv2d(cur, params_[i][0], layer.stride, layer.padding), params_[i][1]);
        break;
      case LayerKind::maxpool: {
        auto pooled = maxpool(cur, layer.window, layer.stride);
        next = std::move(pooled.output);
        cache.argmax_[i] = std::move(pooled.argmax);
        break;
      }
      case LayerKind::flatten:
        next = cur.reshaped({batch, element_count(in_shapes_[i])});
        break;
    }
    next = activate(layer.activation, next);
    cache.inputs_.push_back(std::move(cur));
    cache.outputs_.push_back(next);
    cur = std::move(next);
  }
  cache.valid_ = true;
  return {std::move(cur), std::move(cache)};
}

struct SweepAccess {
  static BackwardResult run(const Segment& seg, ForwardCache&& cache_in, const Tensor& seed) {
    if (!cache_in.valid_) throw StateError("forward cache already consumed or never filled");
    if (cache_in.segment_id_ != seg.id_) throw StateError("forward cache belongs to a different segment");
    if (cache_in.version_ != seg.version_) throw StateError("forward cache is stale: parameters changed since forward");
    ForwardCache cache = std::move(cache_in);
    if (seed.shape() != cache.outputs_.back().shape()) {
      throw DimensionError("seed gradient " + to_string(seed.shape()) + " does not match segment output " +
                           to_string(cache.outputs_.back().shape()));
    }

    const std::size_t n = seg.spec_.layers.size();
    BackwardResult r;
    r.param_grads.resize(n);
    Tensor g = seed;
    for (std::size_t k = n; k-- > 0;) {
      const LayerSpec& layer = seg.spec_.layers[k];
      const Tensor& x = cache.inputs_[k];
      g = activation_grad(layer.activation, g, cache.outputs_[k]);
      switch (layer.kind) {
        case LayerKind::dense:
          r.param_grads[k] = {matmul_tn(x, g), sum_to_last_axis(g)};
          g = matmul_nt(g, seg.params_[k][0]);
          break;
        case LayerKind::conv2d:
          r.param_grads[k] = {conv2d_grad_kernel(x, g, seg.params_[k][0].shape(), layer.stride, layer.padding),
                              sum_to_last_axis(g)};
          g = conv2d_grad_input(g, seg.params_[k][0], x.shape(), layer.stride, layer.padding);
          break;
        case LayerKind::maxpool:
          g = maxpool_grad_input(g, cache.argmax_[k], x.shape());
          break;
        case LayerKind::flatten:
          g = g.reshaped(x.shape());
          break;
      }
    }
    r.grad_input = std::move(g);
    return r;
  }
};

namespace detail {
BackwardResult reverse_sweep(const Segment& segment, ForwardCache&& cache, const Tensor& seed) {
  return SweepAccess::run(segment, std::move(cache), seed);
}
}  // namespace detail

BackwardResult backward_from_loss(const Segment& segment, ForwardCache&& cache, const Tensor& grad_wrt_output) {
  if (segment.role() != SegmentRole::C && segment.role() != SegmentRole::monolithic) {
    throw StateError("backward_from_loss needs a label-holding segment, got role " + std::string(to_string(segment.role())));
  }
  return detail::reverse_sweep(segment, std::move(cache), grad_wrt_output);
}

void sgd_step(Segment& segment, const ParamGrads& grads, const HyperParams& hp) {
  if (!(hp.lr >= 0.0) || !std::isfinite(hp.lr)) throw std::invalid_argument("learning rate must be finite and >= 0");
  if (grads.size() != segment.params_.size()) throw DimensionError("gradient groups do not match parameter groups");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].size() != segment.params_[i].size()) throw DimensionError("gradient count mismatch at layer " + std::to_string(i));
    for (std::size_t j = 0; j < grads[i].size(); ++j) {
      if (grads[i][j].shape() != segment.params_[i][j].shape()) {
        throw DimensionError("gradient shape " + to_string(grads[i][j].shape()) + " does not match parameter " +
                             to_string(segment.params_[i][j].shape()));
      }
    }
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    for (std::size_t j = 0; j < grads[i].size(); ++j) {
      auto p = segment.params_[i][j].data();
      const auto g = grads[i][j].data();
      for (std::size_t e = 0; e < p.size(); ++e) p[e] -= hp.lr * g[e];
    }
  }
  ++segment.version_;
}

}  // namespace splitlearn
