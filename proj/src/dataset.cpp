// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitlearn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "splitlearn/error.hpp"
#include "splitlearn/rng.hpp"

namespace splitlearn {

namespace {

constexpr std::uint32_t kIdxImages = 0x00000803;
constexpr std::uint32_t kIdxLabels = 0x00000801;

std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
         std::uint32_t{b[at + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Tensor Dataset::input_batch(std::size_t first, std::size_t count) const {
  if (count == 0 || first + count > size()) throw DimensionError("batch out of range");
  const std::size_t d = sample_size();
  Shape shape{count};
  shape.insert(shape.end(), sample_shape.begin(), sample_shape.end());
  const auto begin = inputs.begin() + static_cast<std::ptrdiff_t>(first * d);
  return Tensor(std::move(shape), std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(count * d)));
}

std::span<const std::size_t> Dataset::label_batch(std::size_t first, std::size_t count) const {
  if (count == 0 || first + count > size()) throw DimensionError("batch out of range");
  return std::span<const std::size_t>(labels).subspan(first, count);
}

Dataset Dataset::reshaped(Shape shape) const {
  if (element_count(shape) != sample_size()) {
    throw DimensionError("cannot view samples of shape " + to_string(sample_shape) + " as " + to_string(shape));
  }
  Dataset d = *this;
  d.sample_shape = std::move(shape);
  return d;
}

Dataset gen_synthetic(std::uint64_t seed, std::size_t n, const Shape& shape, std::size_t n_classes, double separation) {
  if (n_classes < 2) throw std::invalid_argument("synthetic data needs at least two classes");
  const std::size_t d = element_count(shape);
  if (d == 0 || std::find(shape.begin(), shape.end(), 0) != shape.end()) throw DimensionError("degenerate sample shape");
  if (d < n_classes) {
    throw DimensionError("sample shape " + to_string(shape) + " has fewer features than classes; class means would coincide");
  }
  const double a = separation / std::sqrt(2.0 * static_cast<double>(d / n_classes));

  Dataset out;
  out.sample_shape = shape;
  out.n_classes = n_classes;
  out.source = "synthetic:seed=" + std::to_string(seed);
  out.inputs.resize(n * d);
  out.labels.resize(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % n_classes;
    out.labels[i] = label;
    double* x = out.inputs.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) x[j] = (j % n_classes == label ? a : 0.0) + rng.normal();
  }
  return out;
}

Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels) {
  if (images.size() < 16) throw FormatError("IDX images: truncated header");
  if (be32(images, 0) != kIdxImages) throw FormatError("IDX images: bad magic");
  if (labels.size() < 8) throw FormatError("IDX labels: truncated header");
  if (be32(labels, 0) != kIdxLabels) throw FormatError("IDX labels: bad magic");
  const std::uint64_t n = be32(images, 4), rows = be32(images, 8), cols = be32(images, 12);
  if (rows == 0 || cols == 0) throw FormatError("IDX images: zero-sized image");
  if (images.size() - 16 != n * rows * cols) throw FormatError("IDX images: truncated payload");
  const std::uint64_t n_labels = be32(labels, 4);
  if (labels.size() - 8 != n_labels) throw FormatError("IDX labels: truncated payload");
  if (n_labels != n) throw FormatError("IDX: image count does not match label count");

  Dataset d;
  d.sample_shape = {static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), 1};
  d.source = "idx";
  d.inputs.resize(n * rows * cols);
  for (std::size_t i = 0; i < d.inputs.size(); ++i) d.inputs[i] = images[16 + i] / 255.0;
  d.labels.resize(n);
  std::size_t max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d.labels[i] = labels[8 + i];
    max_label = std::max(max_label, d.labels[i]);
  }
  d.n_classes = n ? max_label + 1 : 0;
  return d;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  Dataset d = parse_idx(read_file(images), read_file(labels));
  d.source = "idx:" + images.string();
  return d;
}

std::vector<std::uint8_t> encode_idx_images(const Dataset& d) {
  if (d.sample_shape.size() != 3 || d.sample_shape[2] != 1) throw DimensionError("IDX images must be rows×cols×1");
  std::vector<std::uint8_t> out;
  put_be32(out, kIdxImages);
  put_be32(out, static_cast<std::uint32_t>(d.size()));
  put_be32(out, static_cast<std::uint32_t>(d.sample_shape[0]));
  put_be32(out, static_cast<std::uint32_t>(d.sample_shape[1]));
  for (double v : d.inputs) out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(const Dataset& d) {
  std::vector<std::uint8_t> out;
  put_be32(out, kIdxLabels);
  put_be32(out, static_cast<std::uint32_t>(d.size()));
  for (auto l : d.labels) {
    if (l > 255) throw std::invalid_argument("IDX labels must fit in a byte");
    out.push_back(static_cast<std::uint8_t>(l));
  }
  return out;
}

}  // namespace splitlearn
