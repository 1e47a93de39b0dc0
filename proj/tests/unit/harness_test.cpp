// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "splitlearn/dataset.hpp"
#include "splitlearn/error.hpp"
#include "splitlearn/harness.hpp"
#include "splitlearn/loss.hpp"

namespace splitlearn {
namespace {

const char* kMlp =
    "name = mlp\ninput = 8\nloss = cross_entropy\ncuts = 1, 3\n"
    "layer = dense units=16 activation=relu\nlayer = dense units=16 activation=relu\n"
    "layer = dense units=16 activation=relu\nlayer = dense units=4 activation=softmax\n";

const char* kCnn =
    "name = cnn\ninput = 8x8x1\nloss = cross_entropy\ncuts = 2, 5\n"
    "layer = conv2d filters=4 kernel=3 padding=same activation=relu\n"
    "layer = maxpool window=2 stride=2\n"
    "layer = conv2d filters=8 kernel=3 padding=valid activation=relu\n"
    "layer = flatten\nlayer = dense units=16 activation=relu\nlayer = dense units=4 activation=softmax\n";

using Bytes = std::vector<std::uint8_t>;

TEST(SyntheticTest, SameSeedSameData) {
  const Dataset a = gen_synthetic(5, 40, {3, 3, 1}, 3), b = gen_synthetic(5, 40, {3, 3, 1}, 3);
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_NE(gen_synthetic(6, 40, {3, 3, 1}, 3).inputs, a.inputs);
}

TEST(SyntheticTest, LabelsBalancedWithinOne) {
  const Dataset d = gen_synthetic(1, 103, {8}, 4);
  std::vector<std::size_t> hist(4);
  for (auto l : d.labels) ++hist[l];
  const auto [lo, hi] = std::minmax_element(hist.begin(), hist.end());
  EXPECT_LE(*hi - *lo, 1u);
}

TEST(SyntheticTest, Errors) {
  EXPECT_THROW(gen_synthetic(1, 10, {8}, 1), std::invalid_argument);
  EXPECT_THROW(gen_synthetic(1, 10, {0, 4}, 2), DimensionError);
  EXPECT_THROW(gen_synthetic(1, 10, {3}, 4), DimensionError);
}

// Class means at least four standard deviations apart: a single softmax
// layer trained on the blobs classifies held-out samples almost perfectly.
double probe_accuracy(std::size_t classes, double separation) {
  const SplitPlan probe = parse_plan("input = 8\nloss = cross_entropy\nlayer = dense units=" +
                                     std::to_string(classes) + " activation=softmax\n");
  const Dataset train = gen_synthetic(11, 400, {8}, classes, separation);
  const Dataset test = gen_synthetic(12, 400, {8}, classes, separation);
  MonolithicTrainer trainer(probe, HyperParams{0.2, 20}, 3);
  for (std::size_t i = 0; i < 600; ++i) {
    const std::size_t first = batch_start(i, train.size(), 20);
    trainer.step(train.input_batch(first, 20), train.label_batch(first, 20));
  }
  const Tensor out = trainer.model().forward(test.input_batch(0, 400)).output;
  return static_cast<double>(count_correct(out, test.label_batch(0, 400))) / 400.0;
}

// Two classes 4 sigma apart leave about 2.3% Bayes error.
TEST(SyntheticTest, LinearProbeTwoClassesAtFourSigma) { EXPECT_GE(probe_accuracy(2, 4.0), 0.95); }

// Four equidistant classes need the wider default gap to clear 95%.
TEST(SyntheticTest, LinearProbeFourClassesAtDefault) { EXPECT_GE(probe_accuracy(4, 6.0), 0.95); }

// Two 2×2 images and their labels, written out byte by byte.
Bytes fixture_images() {
  return {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 0, 255, 51, 102, 255, 0, 0, 204};
}
Bytes fixture_labels() { return {0, 0, 8, 1, 0, 0, 0, 2, 7, 1}; }

TEST(IdxTest, FixtureDecodes) {
  const Dataset d = parse_idx(fixture_images(), fixture_labels());
  EXPECT_EQ(d.sample_shape, (Shape{2, 2, 1}));
  EXPECT_EQ(d.labels, (std::vector<std::size_t>{7, 1}));
  EXPECT_EQ(d.n_classes, 8u);
  const std::vector<double> want{0, 1, 0.2, 0.4, 1, 0, 0, 0.8};
  EXPECT_EQ(d.inputs, want);
}

TEST(IdxTest, ReencodeReproducesBytes) {
  const Dataset d = parse_idx(fixture_images(), fixture_labels());
  EXPECT_EQ(encode_idx_images(d), fixture_images());
  EXPECT_EQ(encode_idx_labels(d), fixture_labels());
}

TEST(IdxTest, Errors) {
  Bytes img = fixture_images(), lab = fixture_labels();
  EXPECT_THROW(parse_idx(Bytes(img.begin(), img.end() - 1), lab), FormatError);
  EXPECT_THROW(parse_idx(img, Bytes(lab.begin(), lab.end() - 1)), FormatError);
  EXPECT_THROW(parse_idx(Bytes(img.begin(), img.begin() + 10), lab), FormatError);
  Bytes bad = img;
  bad[3] = 0x01;
  EXPECT_THROW(parse_idx(bad, lab), FormatError);
  Bytes one_label{0, 0, 8, 1, 0, 0, 0, 1, 3};
  EXPECT_THROW(parse_idx(img, one_label), FormatError);
}

TEST(IdxTest, LoadsFromFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "splitlearn_idx_test";
  std::filesystem::create_directories(dir);
  const auto write = [](const std::filesystem::path& p, const Bytes& b) {
    std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  };
  write(dir / "img", fixture_images());
  write(dir / "lab", fixture_labels());
  const Dataset d = load_idx(dir / "img", dir / "lab");
  EXPECT_EQ(d.size(), 2u);
  EXPECT_THROW(load_idx(dir / "missing", dir / "lab"), FormatError);
  std::filesystem::remove_all(dir);
}

TEST(MonolithicTest, BitwiseReproducible) {
  const SplitPlan plan = parse_plan(kCnn);
  const Dataset d = gen_synthetic(2, 32, {8, 8, 1}, 4);
  const TrainRun a = monolithic_train(plan, d, HyperParams{0.05, 8}, 4, 10, true);
  const TrainRun b = monolithic_train(plan, d, HyperParams{0.05, 8}, 4, 10, true);
  EXPECT_EQ(a.losses, b.losses);
  EXPECT_EQ(a.weights, b.weights);
}

// Full-batch gradient descent with a small step: after warm-up the loss
// falls at every step.
TEST(MonolithicTest, LossDecreasesAfterWarmup) {
  const SplitPlan plan = parse_plan(kMlp);
  const Dataset d = gen_synthetic(3, 64, {8}, 4);
  const TrainRun run = monolithic_train(plan, d, HyperParams{0.05, 64}, 1, 100);
  for (std::size_t i = 20; i + 1 < run.losses.size(); ++i) EXPECT_LT(run.losses[i + 1], run.losses[i]) << "step " << i;
}

TEST(EquivalenceTest, ZeroStepsIsExactlyZero) {
  const Dataset d = gen_synthetic(1, 16, {8}, 4);
  const EquivalenceReport r = equivalence_check(parse_plan(kMlp), d, HyperParams{0.1, 4}, 7, 0);
  EXPECT_EQ(r.max_divergence, 0.0);
}

TEST(EquivalenceTest, DoubleAndSingleSplitTrackMonolithic) {
  const Dataset mlp_data = gen_synthetic(1, 64, {8}, 4);
  const Dataset cnn_data = gen_synthetic(1, 64, {8, 8, 1}, 4);
  const HyperParams hp{0.05, 8};
  EXPECT_LE(equivalence_check(parse_plan(kMlp), mlp_data, hp, 7, 20).max_divergence, 1e-12);
  EXPECT_LE(equivalence_check(with_cuts(parse_plan(kMlp), {2}), mlp_data, hp, 7, 20).max_divergence, 1e-12);
  EXPECT_LE(equivalence_check(parse_plan(kCnn), cnn_data, hp, 7, 20).max_divergence, 1e-12);
  EXPECT_LE(equivalence_check(with_cuts(parse_plan(kCnn), {2}), cnn_data, hp, 7, 20).max_divergence, 1e-12);
}

// Control for the zero-divergence results: quantizing the boundary to
// 32 bits must show up in the same comparison.
TEST(EquivalenceTest, QuantizedWireIsDetected) {
  const Dataset d = gen_synthetic(1, 64, {8}, 4);
  const HyperParams hp{0.05, 8};
  const TrainRun mono = monolithic_train(parse_plan(kMlp), d, hp, 7, 20, true);
  SimulationOptions opts;
  opts.precision = wire::DType::f32;
  opts.record_weights = true;
  const SimulationResult split = simulate_split(parse_plan(kMlp), d, hp, 7, 20, opts);
  ASSERT_EQ(split.run.weights.size(), mono.weights.size());
  double gap = 0.0, moved = 0.0;
  for (std::size_t i = 0; i < mono.weights.back().size(); ++i) {
    gap = std::max(gap, std::fabs(split.run.weights.back()[i] - mono.weights.back()[i]));
    moved = std::max(moved, std::fabs(mono.weights.back()[i] - mono.weights.front()[i]));
  }
  EXPECT_GT(gap, 1e-12);
  EXPECT_LT(gap, 1e-4);
  EXPECT_GT(moved, 1e-3);
}

TEST(EquivalenceTest, LossesAgree) {
  const Dataset d = gen_synthetic(1, 32, {8}, 4);
  const EquivalenceReport r = equivalence_check(with_cuts(parse_plan(kMlp), {3}), d, HyperParams{0.05, 8}, 2, 10);
  ASSERT_EQ(r.split_losses.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(r.split_losses[i], r.mono_losses[i], 1e-12);
}

TEST(SweepTest, TransferFollowsBoundarySize) {
  const SplitPlan plan = parse_plan(kCnn);
  const Dataset d = gen_synthetic(1, 8, {8, 8, 1}, 4);
  const auto rows = split_location_sweep(plan, {{1, 5}, {2, 5}, {3, 5}}, LinkModel::from_ms_mbps(1, 10), d,
                                         HyperParams{0.05, 4}, 1, 2);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].boundary_elements, 256u);
  EXPECT_EQ(rows[1].boundary_elements, 64u);
  EXPECT_EQ(rows[2].boundary_elements, 32u);
  EXPECT_GT(rows[0].transfer_ns, rows[1].transfer_ns);
  EXPECT_GT(rows[1].transfer_ns, rows[2].transfer_ns);
}

TEST(SweepTest, InvalidCandidateSkipped) {
  const SplitPlan plan = parse_plan(kCnn);
  const Dataset d = gen_synthetic(1, 8, {8, 8, 1}, 4);
  const auto rows =
      split_location_sweep(plan, {{0, 5}, {2, 5}, {5, 2}}, LinkModel::ideal(), d, HyperParams{0.05, 4}, 1, 1);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_TRUE(rows[0].skipped);
  EXPECT_FALSE(rows[1].skipped);
  EXPECT_TRUE(rows[2].skipped);
  EXPECT_FALSE(rows[0].reason.empty());
}

TEST(SweepTest, IdealLinkLeavesOnlyCompute) {
  const SplitPlan plan = parse_plan(kCnn);
  const Dataset d = gen_synthetic(1, 8, {8, 8, 1}, 4);
  const auto rows = split_location_sweep(plan, {{1, 5}, {3, 5}}, LinkModel::ideal(), d, HyperParams{0.05, 4}, 1, 1);
  for (const auto& r : rows) {
    EXPECT_EQ(r.transfer_ns, 0.0);
    EXPECT_DOUBLE_EQ(r.total_ns, r.client_compute_ns + r.server_compute_ns + r.serialize_ns);
  }
}

// Bandwidth enters as bytes / bandwidth per frame, so doubling it halves
// the transfer time up to one nanosecond of rounding per frame.
TEST(SweepTest, DoublingBandwidthHalvesTransfer) {
  const SplitPlan plan = parse_plan(kCnn);
  const Dataset d = gen_synthetic(1, 8, {8, 8, 1}, 4);
  const HyperParams hp{0.05, 4};
  const auto slow = split_location_sweep(plan, {{2, 5}}, LinkModel::from_ms_mbps(0, 1), d, hp, 1, 1);
  const auto fast = split_location_sweep(plan, {{2, 5}}, LinkModel::from_ms_mbps(0, 2), d, hp, 1, 1);
  EXPECT_NEAR(slow[0].transfer_ns, 2 * fast[0].transfer_ns, 20.0);
}

}  // namespace
}  // namespace splitlearn
