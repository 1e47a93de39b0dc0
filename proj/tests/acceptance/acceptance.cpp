// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end checks, one PASS/FAIL line each. Exit status is nonzero when
// any check fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "splitlearn/bridge.hpp"
#include "splitlearn/harness.hpp"
#include "splitlearn/runtime.hpp"

namespace splitlearn {
namespace {

const std::string kPlanDir = SPLITLEARN_PLAN_DIR;

std::size_t product(const Shape& s) {
  std::size_t n = 1;
  for (auto d : s) n *= d;
  return n;
}

// Runs one check; a thrown exception counts as a failure.
bool report(int id, const std::string& title, const std::function<bool(std::ostringstream&)>& body) {
  std::ostringstream detail;
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail << "exception: " << e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s [%d] %s | %s | %.2fs\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.str().c_str(), secs);
  std::fflush(stdout);
  return ok;
}

bool split_matches_sgd(std::ostringstream& d) {
  const SplitPlan mlp = load_plan(kPlanDir + "/four_layer_mlp.plan");
  const SplitPlan cnn = load_plan(kPlanDir + "/small_cnn.plan");
  const Dataset vec = gen_synthetic(21, 800, {8}, 4);
  const Dataset img = gen_synthetic(22, 800, {8, 8, 1}, 4);
  struct Case {
    const char* name;
    SplitPlan plan;
    const Dataset* data;
  };
  const std::vector<Case> cases{{"mlp(1,3)", mlp, &vec},
                                {"mlp(2)", with_cuts(mlp, {2}), &vec},
                                {"cnn(2,5)", cnn, &img},
                                {"cnn(2)", with_cuts(cnn, {2}), &img}};
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  for (const auto& c : cases) {
    const auto r = equivalence_check(c.plan, *c.data, HyperParams{0.05, 8}, 5, 100);
    ok = ok && r.per_step.size() == 101 && r.max_divergence <= 1e-9;
    d << c.name << " max|dw|=" << r.max_divergence << "; ";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  d << "limit 1e-9, " << secs << "s of 60s";
  return ok && secs < 60.0;
}

bool gradients_match_differences(std::ostringstream& d) {
  struct Case {
    const char* name;
    SegmentSpec spec;
    Shape batch;
  };
  const std::vector<Case> cases{
      {"dense", {{LayerSpec::dense(6)}, {5}, 0}, {3, 5}},
      {"dense_relu", {{LayerSpec::dense(6, Activation::relu)}, {5}, 0}, {3, 5}},
      {"dense_softmax", {{LayerSpec::dense(5, Activation::softmax)}, {6}, 0}, {3, 6}},
      {"conv_valid", {{LayerSpec::conv(3, 3, 1, Padding::valid)}, {5, 5, 2}, 0}, {2, 5, 5, 2}},
      {"conv_same_s2_relu", {{LayerSpec::conv(3, 3, 2, Padding::same, Activation::relu)}, {6, 5, 2}, 0}, {2, 6, 5, 2}},
      {"maxpool", {{LayerSpec::pool(2, 2)}, {4, 4, 2}, 0}, {2, 4, 4, 2}},
      {"flatten", {{LayerSpec::flat()}, {2, 3, 2}, 0}, {2, 2, 3, 2}},
  };
  double worst = 0.0;
  std::size_t params = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    Rng rng(300 + i);
    const Segment seg(cases[i].spec, SegmentRole::monolithic, 40 + i);
    const auto r = testing::finite_difference_check(seg, testing::random_tensor(cases[i].batch, rng), rng, 1000);
    worst = std::max(worst, r.max_rel_error);
    for (const auto& layer : seg.params()) {
      for (const auto& t : layer) params += t.size();
    }
  }
  d << cases.size() << " layer kinds, " << params << " parameters, max rel err " << worst << " (limit 1e-5)";
  return worst <= 1e-5 && params >= 100;
}

bool mean_shrinks_by_batch(std::ostringstream& d) {
  const SegmentSpec spec{{LayerSpec::dense(7, Activation::relu), LayerSpec::dense(5)}, {6}, 1};
  const Segment b(spec, SegmentRole::B, 9);
  double worst = 0.0;
  for (std::size_t n : {2u, 8u, 32u}) {
    Rng rng(n);
    const Tensor x = testing::random_tensor({n, 6}, rng);
    const BoundaryGradient g{testing::random_tensor({n, 5}, rng), 0};
    ForwardResult f1 = b.forward(x);
    ForwardResult f2 = b.forward(x);
    const auto rsse = auxiliary_backward(b, std::move(f1.cache), g, AuxReduction::rsse);
    const auto mean = auxiliary_backward(b, std::move(f2.cache), g, AuxReduction::mean);
    for (std::size_t l = 0; l < rsse.param_grads.size(); ++l) {
      for (std::size_t p = 0; p < rsse.param_grads[l].size(); ++p) {
        for (std::size_t i = 0; i < rsse.param_grads[l][p].size(); ++i) {
          const double want = rsse.param_grads[l][p][i] / static_cast<double>(n);
          worst = std::max(worst, testing::rel_error(mean.param_grads[l][p][i], want, 1e-300));
        }
      }
    }
  }
  d << "N in {2,8,32}, max rel err " << worst << " (limit 1e-12)";
  return worst <= 1e-12;
}

bool frames_and_bytes(std::ostringstream& d) {
  const SplitPlan cnn = load_plan(kPlanDir + "/small_cnn.plan");
  const Dataset img = gen_synthetic(23, 64, {8, 8, 1}, 4);
  const std::size_t batch = 8;
  bool ok = true;
  for (const auto& plan : {cnn, with_cuts(cnn, {2})}) {
    const PlanLayout layout = validate_plan(plan);
    const auto sim = simulate_split(plan, img, HyperParams{0.05, batch}, 3, 5);
    const bool dbl = layout.mode == SplitMode::double_split;
    for (const auto& step : sim.traffic) {
      std::size_t tensors = 0, labels = 0;
      for (const auto& t : step) {
        if (t.type == wire::MsgType::labels) {
          ++labels;
          continue;
        }
        ++tensors;
        const bool first = t.type == wire::MsgType::act_ab || t.type == wire::MsgType::grad_ba;
        const Shape& boundary = layout.boundary_shapes[first ? 0 : 1];
        ok = ok && t.data_bytes == 4 * batch * product(boundary);
      }
      ok = ok && tensors == (dbl ? 4u : 2u) && labels == (dbl ? 0u : 1u);
    }
    d << (dbl ? "double" : "single") << ": " << sim.traffic.size() << " steps, " << sim.traffic.front().size()
      << " frames/step, act_ab " << sim.traffic.front().front().data_bytes << " B; ";
  }
  d << "payload = 4*B*elements";
  return ok;
}

bool stem_shapes(std::ostringstream& d) {
  const PlanLayout layout = validate_plan(load_plan(kPlanDir + "/inception_stem.plan"));
  const std::vector<Shape> want{{149, 149, 32}, {147, 147, 32}, {147, 147, 64}, {73, 73, 64},
                                {73, 73, 80},   {71, 71, 192},  {35, 35, 192}};
  bool ok = layout.layer_shapes.size() >= want.size();
  for (std::size_t i = 0; ok && i < want.size(); ++i) {
    ok = layout.layer_shapes[i] == want[i];
    d << layout.layer_shapes[i][0] << "x" << layout.layer_shapes[i][1] << "x" << layout.layer_shapes[i][2] << " ";
  }
  return ok;
}

bool stem_sweep(std::ostringstream& d) {
  const SplitPlan stem = load_plan(kPlanDir + "/inception_stem.plan");
  const Dataset img = gen_synthetic(24, 2, {299, 299, 3}, 10);
  // A narrow link so the boundary, not the arithmetic, sets the step time.
  const LinkModel link = LinkModel::from_ms_mbps(20, 1);
  const auto rows = split_location_sweep(stem, {{1, 9}, {4, 9}, {7, 9}}, link, img, HyperParams{0.01, 1}, 1, 1);
  bool ok = rows.size() == 3;
  for (const auto& r : rows) {
    ok = ok && !r.skipped;
    d << "cut " << r.cuts[0] << ": " << r.boundary_elements << " el, transfer " << r.transfer_ns / 1e9
      << "s, total " << r.total_ns / 1e9 << "s; ";
  }
  if (!ok) return false;
  ok = rows[0].boundary_elements == 710432 && rows[1].boundary_elements == 341056 &&
       rows[2].boundary_elements == 235200;
  ok = ok && rows[0].transfer_ns > rows[1].transfer_ns && rows[1].transfer_ns > rows[2].transfer_ns;
  ok = ok && rows[0].total_ns > rows[1].total_ns && rows[1].total_ns > rows[2].total_ns;
  return ok;
}

bool latency_orders_totals(std::ostringstream& d) {
  const SplitPlan mlp = load_plan(kPlanDir + "/four_layer_mlp.plan");
  const Dataset vec = gen_synthetic(25, 64, {8}, 4);
  const std::vector<std::pair<const char*, LinkModel>> links{{"lan", LinkModel::from_ms_mbps(0.5, 100)},
                                                             {"wan", LinkModel::from_ms_mbps(30, 100)},
                                                             {"tunnel", LinkModel::from_ms_mbps(150, 100)}};
  std::vector<double> totals;
  for (const auto& [name, link] : links) {
    const auto rows = split_location_sweep(mlp, {{1, 3}}, link, vec, HyperParams{0.05, 8}, 1, 5);
    totals.push_back(rows.at(0).total_ns);
    d << name << " " << totals.back() / 1e6 << "ms; ";
  }
  d << "per-step totals";
  return totals[0] < totals[1] && totals[1] < totals[2];
}

bool tcp_run_tracks_reference(std::ostringstream& d) {
  const Dataset vec = gen_synthetic(26, 400, {8}, 4);
  SessionConfig base;
  base.plan = load_plan(kPlanDir + "/four_layer_mlp.plan");
  base.seed = 8;
  base.hp = HyperParams{0.05, 8};
  base.epochs = 1;
  base.max_steps = 50;

  SessionConfig server = base;
  server.role = Role::server;
  server.listen = "127.0.0.1:0";
  std::promise<std::uint16_t> port;
  auto served = std::async(std::launch::async, [&] {
    return run_training(server, nullptr, nullptr, [&port](std::uint16_t p) { port.set_value(p); });
  });
  SessionConfig client = base;
  client.role = Role::client;
  client.precision = wire::DType::f32;
  client.connect = "127.0.0.1:" + std::to_string(port.get_future().get());
  const RunSummary c = run_training(client, &vec);
  const RunSummary s = served.get();

  SessionConfig ref = base;
  ref.role = Role::simulate;
  ref.precision = wire::DType::f64;
  const RunSummary r = run_training(ref, &vec);

  const double gap = std::fabs(c.final_loss.value() - r.final_loss.value());
  d << c.steps << " steps, clean=" << (c.clean_shutdown && s.clean_shutdown) << ", loss f32 wire "
    << *c.final_loss << " vs f64 " << *r.final_loss << ", |diff| " << gap << " (limit 1e-3)";
  return c.steps == 50 && s.steps == 50 && c.clean_shutdown && s.clean_shutdown && gap <= 1e-3;
}

}  // namespace
}  // namespace splitlearn

int main() {
  using namespace splitlearn;
  int failed = 0;
  const auto run = [&](int id, const char* title, bool (*fn)(std::ostringstream&)) {
    if (!report(id, title, fn)) ++failed;
  };
  run(1, "split training equals monolithic SGD", split_matches_sgd);
  run(2, "analytic gradients match central differences", gradients_match_differences);
  run(3, "mean auxiliary loss scales gradients by 1/N", mean_shrinks_by_batch);
  run(4, "frame counts and payload bytes per step", frames_and_bytes);
  run(5, "stem output shapes from plan file", stem_shapes);
  run(6, "stem cut sweep ordered by boundary size", stem_sweep);
  run(7, "higher link latency gives longer steps", latency_orders_totals);
  run(8, "socket run with 32-bit wire tracks 64-bit reference", tcp_run_tracks_reference);
  std::printf(
      "INFO [9] absolute device timings and epochs-to-converge are hardware and network bound; not reproduced, "
      "trends are covered by [6] and [7]\n");
  std::printf("%s: %d failed\n", failed ? "FAIL" : "PASS", failed);
  return failed ? 1 : 0;
}
