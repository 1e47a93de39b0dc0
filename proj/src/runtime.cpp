// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitlearn/runtime.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <vector>

#include "splitlearn/error.hpp"
#include "splitlearn/harness.hpp"
#include "splitlearn/session.hpp"
#include "splitlearn/transport.hpp"

namespace splitlearn {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::server: return "server";
    case Role::client: return "client";
    case Role::simulate: return "simulate";
    case Role::oracle: return "oracle";
  }
  return "?";
}

namespace {

std::optional<double> known(double v) {
  if (std::isnan(v)) return std::nullopt;
  return v;
}

/// Accumulates per-step records into a summary and streams them out.
class Recorder {
 public:
  Recorder(const SessionConfig& cfg, std::size_t per_epoch, std::ostream* log)
      : cfg_(cfg), per_epoch_(per_epoch), log_(log) {
    if (cfg.report) writer_.emplace(*cfg.report);
    s_.role = std::string(to_string(cfg.role));
    s_.mode = std::string(to_string(cfg.role == Role::oracle ? SplitMode::no_split : cfg.plan.mode()));
    s_.plan = cfg.plan.name;
    s_.labels_leave_client = cfg.plan.mode() == SplitMode::single_split && cfg.role != Role::oracle;
  }

  void add(const TimingRecord& rec, double loss, std::uint64_t tensor_bytes) {
    const std::uint64_t epoch = per_epoch_ ? s_.steps / per_epoch_ + 1 : 0;
    if (writer_) writer_->step(rec, epoch, known(loss));
    ++s_.steps;
    s_.compute_ns += rec.compute_ns;
    s_.client_compute_ns += rec.client_compute_ns;
    s_.server_compute_ns += rec.server_compute_ns;
    s_.serialize_ns += rec.serialize_ns;
    s_.transfer_ns += rec.transfer_ns;
    s_.wall_ns += rec.wall_ns;
    s_.bytes_sent += rec.bytes_sent;
    s_.bytes_received += rec.bytes_received;
    s_.tensor_bytes += tensor_bytes;
    s_.final_loss = known(loss);
    if (!std::isnan(loss)) {
      epoch_sum_ += loss;
      ++epoch_n_;
    }
    if (per_epoch_ && s_.steps % per_epoch_ == 0) close_epoch(epoch);
  }

  RunSummary finish(std::size_t correct, std::size_t seen) {
    if (per_epoch_ && s_.steps % per_epoch_ != 0) close_epoch(s_.steps / per_epoch_ + 1);
    s_.epochs = per_epoch_ ? (s_.steps + per_epoch_ - 1) / per_epoch_ : 0;
    if (seen) s_.accuracy = static_cast<double>(correct) / static_cast<double>(seen);
    if (writer_) writer_->summary(s_);
    return s_;
  }

  RunSummary& summary() { return s_; }

 private:
  void close_epoch(std::uint64_t epoch) {
    s_.epoch_loss = epoch_n_ ? std::optional<double>(epoch_sum_ / static_cast<double>(epoch_n_)) : std::nullopt;
    if (log_) {
      *log_ << "epoch " << epoch << ": steps " << s_.steps << ", loss ";
      if (s_.epoch_loss) {
        *log_ << std::setprecision(6) << *s_.epoch_loss;
      } else {
        *log_ << "(held by server)";
      }
      *log_ << '\n';
    }
    epoch_sum_ = 0.0;
    epoch_n_ = 0;
  }

  const SessionConfig& cfg_;
  std::size_t per_epoch_;
  std::ostream* log_;
  std::optional<ReportWriter> writer_;
  RunSummary s_;
  double epoch_sum_ = 0.0;
  std::size_t epoch_n_ = 0;
};

std::uint64_t tensor_bytes(const std::vector<TensorTraffic>& traffic) {
  std::uint64_t n = 0;
  for (const auto& t : traffic) n += t.data_bytes;
  return n;
}

std::size_t planned_steps(const SessionConfig& cfg, const Dataset& data) {
  if (data.sample_shape != cfg.plan.input_shape) {
    throw DimensionError("data samples are " + to_string(data.sample_shape) + " but the plan expects " +
                         to_string(cfg.plan.input_shape));
  }
  std::size_t n = cfg.epochs * steps_per_epoch(data.size(), cfg.hp.batch_size);
  if (cfg.max_steps) n = std::min(n, *cfg.max_steps);
  return n;
}

RunSummary run_server(const SessionConfig& cfg, std::ostream* log, const std::function<void(std::uint16_t)>& on_listening) {
  TcpListener listener(parse_endpoint(cfg.listen));
  if (log) *log << "listening on port " << listener.port() << '\n';
  if (on_listening) on_listening(listener.port());
  auto conn = listener.accept();
  ServerSession session(*conn, cfg.plan, cfg.seed);
  const TrainState state = session.run();
  Recorder rec(cfg, 0, log);
  for (std::size_t i = 0; i < state.timings.size(); ++i) {
    rec.add(state.timings[i], state.losses[i], 0);
  }
  rec.summary().tensor_bytes = state.tensor_bytes;
  rec.summary().clean_shutdown = state.clean_shutdown;
  rec.summary().diagnostic = state.diagnostic;
  if (log && !state.clean_shutdown) *log << "warning: " << state.diagnostic << '\n';
  return rec.finish(state.correct, state.seen);
}

RunSummary run_client(const SessionConfig& cfg, const Dataset& data, std::ostream* log) {
  const std::size_t n = planned_steps(cfg, data);
  auto conn = TcpConnection::connect(parse_endpoint(cfg.connect));
  ClientSession session(*conn, cfg.plan, SessionOptions{cfg.hp, cfg.seed, cfg.precision, wire::kDefaultMaxPayload});
  Recorder rec(cfg, steps_per_epoch(data.size(), cfg.hp.batch_size), log);
  std::size_t correct = 0, seen = 0;
  try {
    session.handshake();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t first = batch_start(i, data.size(), cfg.hp.batch_size);
      const StepOutcome out =
          session.step(data.input_batch(first, cfg.hp.batch_size), data.label_batch(first, cfg.hp.batch_size));
      rec.add(out.timing, out.loss.value_or(std::numeric_limits<double>::quiet_NaN()), tensor_bytes(out.traffic));
      if (out.loss) {
        correct += out.correct;
        seen += cfg.hp.batch_size;
      }
    }
    session.finish();
  } catch (const std::exception& e) {
    session.abort(e.what());
    throw;
  }
  return rec.finish(correct, seen);
}

RunSummary run_simulated(const SessionConfig& cfg, const Dataset& data, std::ostream* log) {
  const std::size_t n = planned_steps(cfg, data);
  SimulationOptions opts;
  opts.link = cfg.link;
  opts.precision = cfg.precision;
  const SimulationResult sim = simulate_split(cfg.plan, data, cfg.hp, cfg.seed, n, opts);
  Recorder rec(cfg, steps_per_epoch(data.size(), cfg.hp.batch_size), log);
  for (std::size_t i = 0; i < n; ++i) rec.add(sim.run.timings[i], sim.run.losses[i], tensor_bytes(sim.traffic[i]));
  return rec.finish(sim.run.correct, sim.run.seen);
}

RunSummary run_oracle(const SessionConfig& cfg, const Dataset& data, std::ostream* log) {
  const std::size_t n = planned_steps(cfg, data);
  const TrainRun run = monolithic_train(cfg.plan, data, cfg.hp, cfg.seed, n);
  Recorder rec(cfg, steps_per_epoch(data.size(), cfg.hp.batch_size), log);
  for (std::size_t i = 0; i < n; ++i) rec.add(run.timings[i], run.losses[i], 0);
  return rec.finish(run.correct, run.seen);
}

}  // namespace

RunSummary run_training(const SessionConfig& cfg, const Dataset* data, std::ostream* log,
                        const std::function<void(std::uint16_t)>& on_listening) {
  validate_plan(cfg.plan);
  if (cfg.role == Role::server) return run_server(cfg, log, on_listening);
  if (!data) throw std::invalid_argument(std::string(to_string(cfg.role)) + " role needs a dataset");
  switch (cfg.role) {
    case Role::client: return run_client(cfg, *data, log);
    case Role::simulate: return run_simulated(cfg, *data, log);
    default: return run_oracle(cfg, *data, log);
  }
}

}  // namespace splitlearn
