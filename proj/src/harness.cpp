// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitlearn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iostream>
#include <limits>
#include <thread>

#include "splitlearn/error.hpp"
#include "splitlearn/loss.hpp"

namespace splitlearn {

std::vector<double> flatten_params(const Segment& segment) {
  std::vector<double> out;
  out.reserve(segment.param_count());
  for (const auto& layer : segment.params()) {
    for (const auto& t : layer) out.insert(out.end(), t.values().begin(), t.values().end());
  }
  return out;
}

std::size_t steps_per_epoch(std::size_t n_samples, std::size_t batch_size) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  const std::size_t steps = n_samples / batch_size;
  if (steps == 0) {
    throw std::invalid_argument("dataset of " + std::to_string(n_samples) + " samples is smaller than one batch of " +
                                std::to_string(batch_size));
  }
  return steps;
}

std::size_t batch_start(std::size_t step_index, std::size_t n_samples, std::size_t batch_size) {
  return (step_index % steps_per_epoch(n_samples, batch_size)) * batch_size;
}

// ------------------------------------------------------------ monolithic

MonolithicTrainer::MonolithicTrainer(const SplitPlan& plan, HyperParams hp, std::uint64_t seed)
    : plan_(without_cuts(plan)),
      hp_(hp),
      model_(validate_plan(plan_).segments.at(0), SegmentRole::monolithic, seed) {}

StepResult MonolithicTrainer::step(const Tensor& inputs, std::span<const std::size_t> labels) {
  const Stopwatch t;
  ForwardResult f = model_.forward(inputs, ++step_);
  const Tensor target = make_target(plan_.loss, labels, f.output.shape().back());
  const LossResult lr = loss_and_grad(plan_.loss, f.output, target);
  StepResult out;
  out.loss = lr.loss;
  out.correct = count_correct(f.output, labels);
  BackwardResult b = backward_from_loss(model_, std::move(f.cache), lr.grad);
  sgd_step(model_, b.param_grads, hp_);
  out.compute_ns = t.elapsed_ns();
  return out;
}

double MonolithicTrainer::evaluate_loss(const Tensor& inputs, std::span<const std::size_t> labels) const {
  const ForwardResult f = model_.forward(inputs);
  return loss_and_grad(plan_.loss, f.output, make_target(plan_.loss, labels, f.output.shape().back())).loss;
}

TrainRun monolithic_train(const SplitPlan& plan, const Dataset& data, const HyperParams& hp, std::uint64_t seed,
                          std::size_t n_steps, bool record_weights) {
  MonolithicTrainer trainer(plan, hp, seed);
  TrainRun run;
  if (record_weights) run.weights.push_back(flatten_params(trainer.model()));
  for (std::size_t i = 0; i < n_steps; ++i) {
    const std::size_t first = batch_start(i, data.size(), hp.batch_size);
    const StepResult r = trainer.step(data.input_batch(first, hp.batch_size), data.label_batch(first, hp.batch_size));
    run.losses.push_back(r.loss);
    run.correct += r.correct;
    run.seen += hp.batch_size;
    TimingRecord rec;
    rec.step_id = i + 1;
    rec.compute_ns = r.compute_ns;
    rec.client_compute_ns = r.compute_ns;
    rec.wall_ns = r.compute_ns;
    run.timings.push_back(rec);
    if (record_weights) run.weights.push_back(flatten_params(trainer.model()));
  }
  return run;
}

// ------------------------------------------------------------ simulation

namespace {

std::vector<double> concat(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

SimulationResult simulate_split(const SplitPlan& plan, const Dataset& data, const HyperParams& hp, std::uint64_t seed,
                                std::size_t n_steps, const SimulationOptions& opts) {
  if (plan.mode() == SplitMode::no_split) throw PlanError("simulation needs a plan with one or two cuts");
  auto [client_conn, server_conn] = loopback_transport(opts.link);

  ServerSession server(*server_conn, plan, seed);
  std::vector<std::vector<double>> server_weights;
  if (opts.record_weights) server_weights.push_back(flatten_params(server.segment()));
  ServerObserver observer;
  if (opts.record_weights) {
    observer = [&server_weights](std::uint64_t, const Segment& seg) { server_weights.push_back(flatten_params(seg)); };
  }
  TrainState server_state;
  std::exception_ptr server_error;
  std::thread server_thread([&] {
    try {
      server_state = server.run(observer);
    } catch (...) {
      server_error = std::current_exception();
    }
  });

  ClientSession client(*client_conn, plan, SessionOptions{hp, seed, opts.precision, wire::kDefaultMaxPayload});
  SimulationResult out;
  std::vector<std::vector<double>> client_weights;
  const auto snapshot = [&] {
    std::vector<double> w = flatten_params(client.head());
    client_weights.push_back(client.tail() ? concat(std::move(w), flatten_params(*client.tail())) : std::move(w));
  };
  try {
    if (opts.record_weights) snapshot();
    client.handshake();
    for (std::size_t i = 0; i < n_steps; ++i) {
      const std::size_t first = batch_start(i, data.size(), hp.batch_size);
      StepOutcome step = client.step(data.input_batch(first, hp.batch_size), data.label_batch(first, hp.batch_size));
      out.run.losses.push_back(step.loss.value_or(std::numeric_limits<double>::quiet_NaN()));
      out.run.timings.push_back(step.timing);
      out.run.correct += step.correct;
      out.run.seen += hp.batch_size;
      out.traffic.push_back(std::move(step.traffic));
      out.control_frames.push_back(step.control_frames);
      if (opts.record_weights) snapshot();
    }
    client.finish();
  } catch (...) {
    client.abort("client failed");
    server_thread.join();
    throw;
  }
  server_thread.join();
  if (server_error) std::rethrow_exception(server_error);
  if (server_state.timings.size() != n_steps) throw ProtocolError("server finished a different number of steps");

  const bool loss_on_server = plan.mode() == SplitMode::single_split;
  for (std::size_t i = 0; i < n_steps; ++i) {
    TimingRecord& rec = out.run.timings[i];
    const TimingRecord& srv = server_state.timings[i];
    rec.server_compute_ns = srv.compute_ns;
    rec.compute_ns = rec.client_compute_ns + srv.compute_ns;
    rec.serialize_ns += srv.serialize_ns;
    if (loss_on_server) out.run.losses[i] = server_state.losses[i];
  }
  if (loss_on_server) out.run.correct = server_state.correct;

  if (opts.record_weights) {
    const std::size_t head_size = flatten_params(client.head()).size();
    for (std::size_t i = 0; i <= n_steps; ++i) {
      const auto& cw = client_weights[i];
      std::vector<double> w(cw.begin(), cw.begin() + static_cast<std::ptrdiff_t>(head_size));
      w = concat(std::move(w), server_weights[i]);
      w.insert(w.end(), cw.begin() + static_cast<std::ptrdiff_t>(head_size), cw.end());
      out.run.weights.push_back(std::move(w));
    }
  }
  out.server = std::move(server_state);
  return out;
}

EquivalenceReport equivalence_check(const SplitPlan& plan, const Dataset& data, const HyperParams& hp,
                                    std::uint64_t seed, std::size_t n_steps) {
  const TrainRun mono = monolithic_train(plan, data, hp, seed, n_steps, true);
  SimulationOptions opts;
  opts.link = LinkModel::ideal();
  opts.precision = wire::DType::f64;
  opts.record_weights = true;
  const SimulationResult split = simulate_split(plan, data, hp, seed, n_steps, opts);

  EquivalenceReport report;
  report.split_losses = split.run.losses;
  report.mono_losses = mono.losses;
  for (std::size_t i = 0; i <= n_steps; ++i) {
    const auto& a = mono.weights.at(i);
    const auto& b = split.run.weights.at(i);
    if (a.size() != b.size()) throw DimensionError("split and monolithic models hold different parameter counts");
    double worst = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double d = std::abs(a[j] - b[j]);
      // NaN must not hide behind max().
      if (!(d <= worst)) worst = std::isnan(d) ? std::numeric_limits<double>::infinity() : d;
    }
    report.per_step.push_back(worst);
    report.max_divergence = std::max(report.max_divergence, worst);
  }
  return report;
}

std::vector<SweepRow> split_location_sweep(const SplitPlan& plan, const std::vector<std::vector<std::size_t>>& candidates,
                                           const LinkModel& link, const Dataset& data, const HyperParams& hp,
                                           std::uint64_t seed, std::size_t n_steps) {
  if (n_steps == 0) throw std::invalid_argument("sweep needs at least one step per cut");
  std::vector<SweepRow> rows;
  for (const auto& cuts : candidates) {
    SweepRow row;
    row.cuts = cuts;
    SplitPlan cut_plan;
    PlanLayout layout;
    try {
      cut_plan = with_cuts(plan, cuts);
      layout = validate_plan(cut_plan);
      if (layout.mode == SplitMode::no_split) throw PlanError("no cut given");
    } catch (const std::exception& e) {
      row.skipped = true;
      row.reason = e.what();
      std::cerr << "warning: skipping cut candidate: " << e.what() << '\n';
      rows.push_back(std::move(row));
      continue;
    }
    row.boundary_elements = element_count(layout.boundary_shapes.front());
    SimulationOptions opts;
    opts.link = link;
    const SimulationResult sim = simulate_split(cut_plan, data, hp, seed, n_steps, opts);
    for (const auto& rec : sim.run.timings) {
      row.client_compute_ns += static_cast<double>(rec.client_compute_ns);
      row.server_compute_ns += static_cast<double>(rec.server_compute_ns);
      row.serialize_ns += static_cast<double>(rec.serialize_ns);
      row.transfer_ns += static_cast<double>(rec.transfer_ns);
      row.total_ns += static_cast<double>(rec.total_ns());
    }
    const double n = static_cast<double>(n_steps);
    row.client_compute_ns /= n;
    row.server_compute_ns /= n;
    row.serialize_ns /= n;
    row.transfer_ns /= n;
    row.total_ns /= n;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace splitlearn
