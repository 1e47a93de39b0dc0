// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "splitlearn/layer.hpp"
#include "splitlearn/loss.hpp"
#include "splitlearn/segment.hpp"

namespace splitlearn {

enum class SplitMode { no_split, single_split, double_split };

std::string_view to_string(SplitMode mode);

/// A whole network plus where to cut it. A cut k places layers [0, k) on
/// the upstream side, so cuts must lie strictly inside (0, layers.size()).
struct SplitPlan {
  std::string name;
  Shape input_shape;
  LossKind loss = LossKind::cross_entropy;
  std::vector<LayerSpec> layers;
  std::vector<std::size_t> cuts;

  SplitMode mode() const;
};

/// A validated plan: per-party segment specs plus every boundary shape.
struct PlanLayout {
  SplitMode mode = SplitMode::no_split;
  std::vector<SegmentSpec> segments;
  std::vector<SegmentRole> roles;
  /// Per-sample output shape of every layer.
  std::vector<Shape> layer_shapes;
  /// Per-sample shape crossing each cut, upstream to downstream.
  std::vector<Shape> boundary_shapes;
  Shape output_shape;
};

PlanLayout validate_plan(const SplitPlan& plan);

/// The plan without cuts: one monolithic segment.
SplitPlan without_cuts(SplitPlan plan);
SplitPlan with_cuts(SplitPlan plan, std::vector<std::size_t> cuts);

/// Plan file grammar (one statement per line, '#' starts a comment):
///
///   name  = <identifier>
///   input = <d0>x<d1>x...           per-sample input shape
///   loss  = mse | cross_entropy
///   cuts  = <k1>[, <k2>]            optional; "none" for no split
///   layer = dense units=<n> [activation=<act>]
///   layer = conv2d filters=<n> kernel=<k|khxkw> [stride=<s>] [padding=valid|same] [activation=<act>]
///   layer = maxpool window=<w> [stride=<s>]
///   layer = flatten
///
/// `layer` lines are ordered. <act> is identity, relu or softmax.
SplitPlan parse_plan(std::string_view text);
SplitPlan load_plan(const std::filesystem::path& path);

/// Canonical text form; parse_plan(format_plan(p)) == p.
std::string format_plan(const SplitPlan& plan);

/// FNV-1a over the canonical text; both parties compare it at handshake.
std::uint64_t plan_hash(const SplitPlan& plan);

bool operator==(const SplitPlan& a, const SplitPlan& b);

}  // namespace splitlearn
