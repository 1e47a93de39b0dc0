// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "splitlearn/tensor.hpp"

namespace splitlearn {

/// Labelled samples stored flat, row-major, one sample after another.
struct Dataset {
  Shape sample_shape;
  std::size_t n_classes = 0;
  std::vector<double> inputs;
  std::vector<std::size_t> labels;
  std::string source;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t sample_size() const { return element_count(sample_shape); }

  /// Samples [first, first + count) as a count×sample_shape tensor.
  Tensor input_batch(std::size_t first, std::size_t count) const;
  std::span<const std::size_t> label_batch(std::size_t first, std::size_t count) const;
  /// Same samples under another per-sample shape of equal size.
  Dataset reshaped(Shape shape) const;
};

/// Gaussian class-conditional blobs.
///
/// Sample i has label i mod n_classes. Its features are μ_label + ε with
/// ε ~ N(0, 1) per element, drawn from Rng(seed) in sample order. The class
/// mean puts the value a on every feature j with j mod n_classes == label
/// and 0 elsewhere, with a = separation / sqrt(2·floor(D / n_classes)) so
/// any two class means are at least `separation` standard deviations apart.
Dataset gen_synthetic(std::uint64_t seed, std::size_t n, const Shape& shape, std::size_t n_classes,
                      double separation = 6.0);

/// IDX (the MNIST container): images magic 0x00000803 with n, rows, cols;
/// labels magic 0x00000801 with n; big-endian u32 header fields, unsigned
/// byte payload. Pixels are scaled to [0, 1]; samples are rows×cols×1.
Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels);
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Inverse of parse_idx for rows×cols×1 datasets with labels < 256.
std::vector<std::uint8_t> encode_idx_images(const Dataset& d);
std::vector<std::uint8_t> encode_idx_labels(const Dataset& d);

}  // namespace splitlearn
