// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitlearn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "splitlearn/error.hpp"

namespace splitlearn {

namespace {

constexpr double kProbabilityTolerance = 1e-4;

Tensor one_hot_from(const Tensor& prediction, const Tensor& target) {
  const std::size_t batch = prediction.dim(0);
  const std::size_t classes = prediction.dim(1);
  if (target.shape() == prediction.shape()) return target;
  if (target.rank() != 1 || target.dim(0) != batch) {
    throw DimensionError("cross_entropy: target " + to_string(target.shape()) + " is neither one-hot " +
                         to_string(prediction.shape()) + " nor " + std::to_string(batch) + " class indices");
  }
  Tensor hot({batch, classes});
  for (std::size_t b = 0; b < batch; ++b) {
    const double v = target[b];
    if (!(v >= 0.0) || v != std::floor(v) || v >= static_cast<double>(classes)) {
      throw std::invalid_argument("cross_entropy: class index " + std::to_string(v) + " out of range");
    }
    hot[b * classes + static_cast<std::size_t>(v)] = 1.0;
  }
  return hot;
}

}  // namespace

std::string_view to_string(LossKind kind) { return kind == LossKind::mse ? "mse" : "cross_entropy"; }

LossResult loss_and_grad(LossKind kind, const Tensor& prediction, const Tensor& target) {
  if (prediction.rank() < 1) throw DimensionError("loss: prediction has no batch axis");
  const double batch = static_cast<double>(prediction.dim(0));
  LossResult r{0.0, Tensor(prediction.shape())};

  if (kind == LossKind::mse) {
    if (prediction.shape() != target.shape()) {
      throw DimensionError("mse: prediction " + to_string(prediction.shape()) + " vs target " + to_string(target.shape()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < prediction.size(); ++i) {
      const double d = prediction[i] - target[i];
      sum += d * d;
      r.grad[i] = d / batch;
    }
    r.loss = 0.5 * sum / batch;
    return r;
  }

  if (prediction.rank() != 2) throw DimensionError("cross_entropy: prediction must be B×K, got " + to_string(prediction.shape()));
  const Tensor hot = one_hot_from(prediction, target);
  const std::size_t classes = prediction.dim(1);
  double sum = 0.0;
  for (std::size_t row = 0; row < prediction.size(); row += classes) {
    double total = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
      const double p = prediction[row + k];
      if (!(p >= 0.0) || p > 1.0 + kProbabilityTolerance) {
        throw std::invalid_argument("cross_entropy: prediction is not a probability vector (entry " + std::to_string(p) + ")");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
      throw std::invalid_argument("cross_entropy: prediction row sums to " + std::to_string(total) + ", not 1");
    }
    for (std::size_t k = 0; k < classes; ++k) {
      const double t = hot[row + k];
      if (t == 0.0) continue;
      const double p = prediction[row + k];
      if (p <= 0.0) throw std::invalid_argument("cross_entropy: zero probability on a target class");
      sum -= t * std::log(p);
      r.grad[row + k] = -t / (batch * p);
    }
  }
  r.loss = sum / batch;
  return r;
}

Tensor make_target(LossKind kind, std::span<const std::size_t> labels, std::size_t n_outputs) {
  if (labels.empty()) throw DimensionError("make_target: empty label batch");
  if (kind == LossKind::cross_entropy) {
    Tensor t({labels.size()});
    for (std::size_t b = 0; b < labels.size(); ++b) t[b] = static_cast<double>(labels[b]);
    return t;
  }
  Tensor t({labels.size(), n_outputs});
  for (std::size_t b = 0; b < labels.size(); ++b) {
    if (labels[b] >= n_outputs) throw std::invalid_argument("make_target: label out of range");
    t[b * n_outputs + labels[b]] = 1.0;
  }
  return t;
}

std::size_t count_correct(const Tensor& prediction, std::span<const std::size_t> labels) {
  const std::size_t classes = prediction.shape().back();
  std::size_t correct = 0;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    const auto row = prediction.data().subspan(b * classes, classes);
    const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best == labels[b]) ++correct;
  }
  return correct;
}

}  // namespace splitlearn
