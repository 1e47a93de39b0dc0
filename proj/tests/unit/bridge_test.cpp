// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <bit>
#include <cmath>

#include "oracles.hpp"
#include "splitlearn/bridge.hpp"
#include "splitlearn/error.hpp"
#include "splitlearn/loss.hpp"
#include "splitlearn/plan.hpp"

namespace splitlearn {
namespace {

using testing::random_tensor;

const char* kMlp =
    "input = 8\nloss = cross_entropy\ncuts = 1, 3\n"
    "layer = dense units=16 activation=relu\nlayer = dense units=16 activation=relu\n"
    "layer = dense units=16 activation=relu\nlayer = dense units=4 activation=softmax\n";

TEST(AuxTargetTest, ForcedArithmetic) {
  const AuxiliaryTarget t = make_auxiliary_target(Tensor({2}, {1.0, 2.0}), {Tensor({2}, {0.5, -0.5}), 1});
  EXPECT_EQ(t.tensor(), Tensor({2}, {1.5, 1.5}));
}

TEST(AuxTargetTest, ZeroGradientKeepsActivation) {
  Rng rng(1);
  const Tensor c = random_tensor({3, 4}, rng);
  EXPECT_EQ(make_auxiliary_target(c, {Tensor({3, 4}), 1}).tensor(), c);
}

TEST(AuxTargetTest, ResidualIsReceivedGradientBitwise) {
  Rng rng(2);
  const Tensor c = random_tensor({4, 5}, rng, -100, 100), g = random_tensor({4, 5}, rng, -1e-3, 1e-3);
  const Tensor c0 = c, g0 = g;
  const AuxiliaryTarget t = make_auxiliary_target(c, {g, 1});
  EXPECT_EQ(t.residual(), g);
  EXPECT_EQ(c, c0);
  EXPECT_EQ(g, g0);
}

// When c and g lie on a common dyadic grid the sum is exact, so ĉ − c
// reproduces g bit for bit.
TEST(AuxTargetTest, DifferenceExactOnDyadicGrid) {
  Rng rng(3);
  Tensor c({64}), g({64});
  for (std::size_t i = 0; i < 64; ++i) {
    c[i] = static_cast<double>(static_cast<std::int64_t>(rng.below(1 << 20)) - (1 << 19)) / 1024.0;
    g[i] = static_cast<double>(static_cast<std::int64_t>(rng.below(1 << 20)) - (1 << 19)) / 1024.0;
  }
  const AuxiliaryTarget t = make_auxiliary_target(c, {g, 1});
  for (std::size_t i = 0; i < 64; ++i) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(t.tensor()[i] - c[i]), std::bit_cast<std::uint64_t>(g[i]));
  }
}

// For arbitrary doubles ĉ − c differs from g by at most one rounding of ĉ.
TEST(AuxTargetTest, DifferenceWithinOneUlpOfTarget) {
  Rng rng(4);
  const Tensor c = random_tensor({200}, rng, -10, 10), g = random_tensor({200}, rng, -1, 1);
  const AuxiliaryTarget t = make_auxiliary_target(c, {g, 1});
  for (std::size_t i = 0; i < 200; ++i) {
    const double ulp = std::nextafter(std::abs(t.tensor()[i]), INFINITY) - std::abs(t.tensor()[i]);
    EXPECT_LE(std::abs((t.tensor()[i] - c[i]) - g[i]), ulp);
  }
}

TEST(AuxTargetTest, ShapeMismatchIsDesync) {
  EXPECT_THROW(make_auxiliary_target(Tensor({2, 3}), {Tensor({3, 2}), 1}), ProtocolError);
}

TEST(AuxLossTest, ForcedArithmetic) {
  const Tensor c({2}, {1, 2});
  EXPECT_EQ(auxiliary_loss(c, make_auxiliary_target(c, {Tensor({2}, {0.5, -0.5}), 1})), 0.25);
  EXPECT_EQ(auxiliary_loss(c, make_auxiliary_target(c, {Tensor({2}), 1})), 0.0);
}

TEST(AuxLossTest, RsseIsBatchTimesMean) {
  Rng rng(5);
  for (std::size_t n : {1u, 3u, 16u}) {
    const Tensor c = random_tensor({n, 7}, rng), g = random_tensor({n, 7}, rng);
    const AuxiliaryTarget t = make_auxiliary_target(c, {g, 1});
    // Independent evaluation of both reductions.
    double rsse = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) rsse += 0.5 * g[i] * g[i];
    EXPECT_NEAR(auxiliary_loss(c, t), rsse, 1e-12 * rsse);
    EXPECT_NEAR(auxiliary_loss_mean(c, t), rsse / static_cast<double>(n), 1e-12 * rsse);
  }
}

TEST(AuxBackwardTest, ZeroGradientGivesZeroUpdates) {
  SegmentSpec spec{{LayerSpec::dense(4, Activation::relu), LayerSpec::dense(3)}, {5}, 1};
  const Segment b(spec, SegmentRole::B, 3);
  Rng rng(6);
  ForwardResult f = b.forward(random_tensor({2, 5}, rng), 7);
  const BackwardResult r = auxiliary_backward(b, std::move(f.cache), {Tensor({2, 3}), 7});
  for (const auto& layer : r.param_grads)
    for (const auto& t : layer)
      for (double v : t.data()) EXPECT_EQ(v, 0.0);
  for (double v : r.grad_input.data()) EXPECT_EQ(v, 0.0);
}

// One dense layer with identity activation: c = bW + β. The weight
// gradient is bᵀg, worked out by hand for a 2×2 instance.
TEST(AuxBackwardTest, DenseLayerByHand) {
  SegmentSpec spec{{LayerSpec::dense(2)}, {2}, 0};
  const Segment a(spec, SegmentRole::A, {{Tensor({2, 2}, {1, 0, 0, 1}), Tensor({2})}});
  ForwardResult f = a.forward(Tensor({1, 2}, {3, 5}), 1);
  const BackwardResult r = auxiliary_backward(a, std::move(f.cache), {Tensor({1, 2}, {2, -1}), 1});
  EXPECT_EQ(r.param_grads[0][0], Tensor({2, 2}, {6, -3, 10, -5}));
  EXPECT_EQ(r.param_grads[0][1], Tensor({2}, {2, -1}));
  EXPECT_EQ(r.grad_input, Tensor({1, 2}, {2, -1}));
}

TEST(AuxBackwardTest, RoleAndCacheChecks) {
  SegmentSpec spec{{LayerSpec::dense(2)}, {2}, 0};
  const Segment c(spec, SegmentRole::C, 1);
  ForwardResult f = c.forward(Tensor({1, 2}), 1);
  EXPECT_THROW(auxiliary_backward(c, std::move(f.cache), {Tensor({1, 2}), 1}), StateError);

  const Segment a(spec, SegmentRole::A, 1);
  ForwardResult g = a.forward(Tensor({1, 2}), 4);
  EXPECT_THROW(auxiliary_backward(a, std::move(g.cache), {Tensor({1, 2}), 5}), ProtocolError);
  ForwardResult h = a.forward(Tensor({1, 2}), 4);
  EXPECT_THROW(auxiliary_backward(a, std::move(h.cache), {Tensor({1, 3}), 4}), ProtocolError);
}

// Seeding with g through the auxiliary target gives exactly the sweep a
// loss-holding copy of the same segment would run.
TEST(BridgeProperty, AuxiliaryMatchesDirectSeed) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    SegmentSpec spec{{LayerSpec::conv(2, 3, 1, Padding::same, Activation::relu), LayerSpec::pool(2, 2),
                      LayerSpec::flat(), LayerSpec::dense(1 + rng.below(5), Activation::relu)},
                     {4 + 2 * rng.below(2), 4, 1 + rng.below(2)},
                     0};
    const std::uint64_t seed = rng.next_u64();
    const Segment b(spec, SegmentRole::B, seed);
    const Segment m(spec, SegmentRole::monolithic, seed);
    const Tensor x = random_tensor({3, spec.input_shape[0], 4, spec.input_shape[2]}, rng);
    ForwardResult fb = b.forward(x, 1);
    ForwardResult fm = m.forward(x, 1);
    const Tensor g = random_tensor(fb.output.shape(), rng);
    const BackwardResult viaaux = auxiliary_backward(b, std::move(fb.cache), {g, 1});
    const BackwardResult direct = backward_from_loss(m, std::move(fm.cache), g);
    for (std::size_t l = 0; l < direct.param_grads.size(); ++l)
      for (std::size_t p = 0; p < direct.param_grads[l].size(); ++p)
        EXPECT_LE(max_abs_diff(viaaux.param_grads[l][p], direct.param_grads[l][p]), 1e-12);
    EXPECT_LE(max_abs_diff(viaaux.grad_input, direct.grad_input), 1e-12);
  }
}

struct MlpParts {
  Segment a, b, c, mono;
};

MlpParts make_mlp(std::uint64_t seed) {
  const SplitPlan plan = parse_plan(kMlp);
  const PlanLayout split = validate_plan(plan);
  const PlanLayout mono = validate_plan(without_cuts(plan));
  return {Segment(split.segments[0], SegmentRole::A, seed), Segment(split.segments[1], SegmentRole::B, seed),
          Segment(split.segments[2], SegmentRole::C, seed), Segment(mono.segments[0], SegmentRole::monolithic, seed)};
}

// Per-parameter gradients of A and B under the bridge equal the monolithic
// oracle's gradients for the same parameters.
TEST(BridgeEquivalence, DoubleSplitGradientsMatchMonolithic) {
  MlpParts m = make_mlp(21);
  Rng rng(9);
  const Tensor x = random_tensor({4, 8}, rng);
  const std::vector<std::size_t> labels{0, 1, 2, 3};
  const Tensor target = make_target(LossKind::cross_entropy, labels, 4);

  ForwardResult fo = m.mono.forward(x, 1);
  const LossResult lo = loss_and_grad(LossKind::cross_entropy, fo.output, target);
  const BackwardResult oracle = backward_from_loss(m.mono, std::move(fo.cache), lo.grad);

  ForwardResult fa = m.a.forward(x, 1);
  ForwardResult fb = m.b.forward(fa.output, 1);
  ForwardResult fc = m.c.forward(fb.output, 1);
  const LossResult lc = loss_and_grad(LossKind::cross_entropy, fc.output, target);
  EXPECT_EQ(lc.loss, lo.loss);
  const BackwardResult gc = backward_from_loss(m.c, std::move(fc.cache), lc.grad);
  const BackwardResult gb = auxiliary_backward(m.b, std::move(fb.cache), {gc.grad_input, 1});
  const BackwardResult ga = auxiliary_backward(m.a, std::move(fa.cache), {gb.grad_input, 1});

  const std::vector<const ParamGrads*> split{&ga.param_grads, &gb.param_grads, &gb.param_grads, &gc.param_grads};
  const std::vector<std::size_t> local{0, 0, 1, 0};
  for (std::size_t layer = 0; layer < 4; ++layer) {
    for (std::size_t p = 0; p < 2; ++p) {
      EXPECT_LE(max_abs_diff((*split[layer])[local[layer]][p], oracle.param_grads[layer][p]), 1e-12)
          << "layer " << layer;
    }
  }
}

TEST(BridgeEquivalence, OneSgdStepMatchesMonolithic) {
  MlpParts m = make_mlp(22);
  Rng rng(10);
  const Tensor x = random_tensor({3, 8}, rng);
  const std::vector<std::size_t> labels{2, 0, 1};
  const Tensor target = make_target(LossKind::cross_entropy, labels, 4);
  const HyperParams hp{0.1, 3};

  ForwardResult fo = m.mono.forward(x, 1);
  const BackwardResult go = backward_from_loss(m.mono, std::move(fo.cache),
                                               loss_and_grad(LossKind::cross_entropy, fo.output, target).grad);
  sgd_step(m.mono, go.param_grads, hp);

  ForwardResult fa = m.a.forward(x, 1);
  ForwardResult fb = m.b.forward(fa.output, 1);
  ForwardResult fc = m.c.forward(fb.output, 1);
  const BackwardResult gc =
      backward_from_loss(m.c, std::move(fc.cache), loss_and_grad(LossKind::cross_entropy, fc.output, target).grad);
  sgd_step(m.c, gc.param_grads, hp);
  const BackwardResult gb = auxiliary_backward(m.b, std::move(fb.cache), {gc.grad_input, 1});
  sgd_step(m.b, gb.param_grads, hp);
  const BackwardResult ga = auxiliary_backward(m.a, std::move(fa.cache), {gb.grad_input, 1});
  sgd_step(m.a, ga.param_grads, hp);

  const auto& mono = m.mono.params();
  const std::vector<const LayerParams*> split{&m.a.params()[0], &m.b.params()[0], &m.b.params()[1], &m.c.params()[0]};
  for (std::size_t layer = 0; layer < 4; ++layer)
    for (std::size_t p = 0; p < 2; ++p) EXPECT_LE(max_abs_diff((*split[layer])[p], mono[layer][p]), 1e-12);
}

TEST(BridgeEquivalence, MeanReductionScalesGradientsByBatch) {
  for (std::size_t n : {2u, 8u, 32u}) {
    SegmentSpec spec{{LayerSpec::dense(6, Activation::relu), LayerSpec::dense(5)}, {4}, 1};
    const Segment b(spec, SegmentRole::B, 5);
    Rng rng(n);
    const Tensor x = random_tensor({n, 4}, rng);
    const Tensor g = random_tensor({n, 5}, rng);
    ForwardResult f1 = b.forward(x, 1), f2 = b.forward(x, 1);
    const BackwardResult rsse = auxiliary_backward(b, std::move(f1.cache), {g, 1}, AuxReduction::rsse);
    const BackwardResult mean = auxiliary_backward(b, std::move(f2.cache), {g, 1}, AuxReduction::mean);
    for (std::size_t l = 0; l < 2; ++l) {
      for (std::size_t p = 0; p < 2; ++p) {
        const Tensor& r = rsse.param_grads[l][p];
        const Tensor& m = mean.param_grads[l][p];
        for (std::size_t i = 0; i < r.size(); ++i) {
          const double want = r[i] / static_cast<double>(n);
          EXPECT_LE(std::abs(m[i] - want), 1e-12 * std::max(std::abs(want), 1e-300)) << "N=" << n;
        }
      }
    }
  }
}

}  // namespace
}  // namespace splitlearn
