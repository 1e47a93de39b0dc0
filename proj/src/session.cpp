// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitlearn/session.hpp"

#include <cmath>
#include <limits>

#include "splitlearn/bridge.hpp"
#include "splitlearn/error.hpp"
#include "splitlearn/loss.hpp"

namespace splitlearn {

using wire::MsgType;
using wire::WireMessage;

double TrainState::running_loss() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (double l : losses) {
    if (std::isnan(l)) continue;
    sum += l;
    ++n;
  }
  return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

namespace {

Segment build_segment(const SplitPlan& plan, std::size_t index, std::uint64_t seed) {
  const PlanLayout layout = validate_plan(plan);
  return Segment(layout.segments.at(index), layout.roles.at(index), seed);
}

std::optional<Segment> build_tail(const SplitPlan& plan, std::uint64_t seed) {
  if (plan.mode() != SplitMode::double_split) return std::nullopt;
  return build_segment(plan, 2, seed);
}

std::vector<std::size_t> labels_from_tensor(const Tensor& t, std::size_t batch, std::size_t classes) {
  if (t.rank() != 1 || t.dim(0) != batch) {
    throw ProtocolError("LABELS tensor " + to_string(t.shape()) + " does not match batch of " + std::to_string(batch));
  }
  std::vector<std::size_t> labels(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const double v = t[i];
    if (!(v >= 0.0) || v != std::floor(v) || v >= static_cast<double>(classes)) {
      throw ProtocolError("LABELS carries an invalid class index " + std::to_string(v));
    }
    labels[i] = static_cast<std::size_t>(v);
  }
  return labels;
}

Tensor labels_to_tensor(std::span<const std::size_t> labels) {
  Tensor t({labels.size()});
  for (std::size_t i = 0; i < labels.size(); ++i) t[i] = static_cast<double>(labels[i]);
  return t;
}

}  // namespace

// ---------------------------------------------------------------- client

ClientSession::ClientSession(Connection& conn, const SplitPlan& plan, SessionOptions opts)
    : ClientSession(conn, plan, build_segment(plan, 0, opts.seed), build_tail(plan, opts.seed), opts) {}

ClientSession::ClientSession(Connection& conn, const SplitPlan& plan, Segment head, std::optional<Segment> tail,
                             SessionOptions opts)
    : conn_(conn),
      plan_(plan),
      mode_(plan.mode()),
      opts_(opts),
      head_(std::move(head)),
      tail_(std::move(tail)),
      channel_(conn, opts.max_payload),
      plan_hash_(plan_hash(plan)) {
  if (mode_ == SplitMode::no_split) throw PlanError("a client session needs a plan with one or two cuts");
  if (head_.role() != SegmentRole::A) throw StateError("client head segment must have role A");
  if (mode_ == SplitMode::double_split && (!tail_ || tail_->role() != SegmentRole::C)) {
    throw StateError("double split needs a role C tail segment on the client");
  }
  if (mode_ == SplitMode::single_split && tail_) throw StateError("single split keeps the tail on the server");
}

void ClientSession::handshake() {
  wire::Hello hello;
  hello.plan_hash = plan_hash_;
  hello.mode = mode_;
  hello.seed = opts_.seed;
  hello.lr = opts_.hp.lr;
  hello.batch_size = static_cast<std::uint32_t>(opts_.hp.batch_size);
  hello.precision = opts_.precision;
  channel_.send(WireMessage{MsgType::hello, 0, wire::encode_hello(hello)});
  const WireMessage ack = channel_.expect(MsgType::plan_ack, 0);
  if (wire::decode_u64(ack.payload) != plan_hash_) throw ProtocolError("server acknowledged a different plan");
  handshaken_ = true;
}

StepOutcome ClientSession::step(const Tensor& inputs, std::span<const std::size_t> labels) {
  return mode_ == SplitMode::double_split ? step_double(inputs, labels) : step_single(inputs, labels);
}

void ClientSession::close_out(StepOutcome& out, const Mark& before, std::uint64_t compute_ns, const Stopwatch& wall) {
  const ChannelStats& now = channel_.stats();
  out.timing.step_id = step_;
  out.timing.compute_ns = compute_ns;
  out.timing.client_compute_ns = compute_ns;
  out.timing.serialize_ns = now.serialize_ns - before.stats.serialize_ns;
  out.timing.transfer_ns = channel_.transfer_ns() - before.transfer_ns;
  out.timing.bytes_sent = now.bytes_sent - before.stats.bytes_sent;
  out.timing.bytes_received = now.bytes_received - before.stats.bytes_received;
  out.traffic = channel_.take_traffic();
  out.timing.wall_ns = wall.elapsed_ns();
}

StepOutcome ClientSession::step_double(const Tensor& inputs, std::span<const std::size_t> labels) {
  if (mode_ != SplitMode::double_split) throw StateError("step_double on a single-split session");
  if (!handshaken_) throw StateError("handshake has not completed");
  if (inputs.rank() == 0 || inputs.dim(0) != labels.size()) throw DimensionError("inputs and labels disagree on batch size");
  const Stopwatch wall;
  const Mark before = mark();
  const std::uint64_t control_before = channel_.control_frames();
  const std::uint64_t s = ++step_;
  std::uint64_t compute = 0;
  StepOutcome out;

  Stopwatch t;
  ForwardResult a = head_.forward(inputs, s);
  compute += t.elapsed_ns();
  channel_.send_tensor(MsgType::act_ab, s, a.output, opts_.precision);

  const Tensor from_b = channel_.recv_tensor(MsgType::act_bc, s);
  t = Stopwatch();
  ForwardResult c = tail_->forward(from_b, s);
  const Tensor target = make_target(plan_.loss, labels, c.output.shape().back());
  const LossResult loss = loss_and_grad(plan_.loss, c.output, target);
  out.loss = loss.loss;
  out.correct = count_correct(c.output, labels);
  BackwardResult bc = backward_from_loss(*tail_, std::move(c.cache), loss.grad);
  sgd_step(*tail_, bc.param_grads, opts_.hp);
  compute += t.elapsed_ns();
  channel_.send_tensor(MsgType::grad_cb, s, bc.grad_input, opts_.precision);

  BoundaryGradient g{channel_.recv_tensor(MsgType::grad_ba, s), s};
  t = Stopwatch();
  BackwardResult ba = auxiliary_backward(head_, std::move(a.cache), g);
  sgd_step(head_, ba.param_grads, opts_.hp);
  compute += t.elapsed_ns();
  channel_.send(WireMessage{MsgType::step_done, s, {}});

  close_out(out, before, compute, wall);
  out.control_frames = channel_.control_frames() - control_before;
  return out;
}

StepOutcome ClientSession::step_single(const Tensor& inputs, std::span<const std::size_t> labels) {
  if (mode_ != SplitMode::single_split) throw StateError("step_single on a double-split session");
  if (!handshaken_) throw StateError("handshake has not completed");
  if (inputs.rank() == 0 || inputs.dim(0) != labels.size()) throw DimensionError("inputs and labels disagree on batch size");
  const Stopwatch wall;
  const Mark before = mark();
  const std::uint64_t control_before = channel_.control_frames();
  const std::uint64_t s = ++step_;
  std::uint64_t compute = 0;
  StepOutcome out;

  Stopwatch t;
  ForwardResult a = head_.forward(inputs, s);
  compute += t.elapsed_ns();
  channel_.send_tensor(MsgType::act_ab, s, a.output, opts_.precision);
  channel_.send_tensor(MsgType::labels, s, labels_to_tensor(labels), opts_.precision);

  BoundaryGradient g{channel_.recv_tensor(MsgType::grad_ba, s), s};
  t = Stopwatch();
  BackwardResult ba = auxiliary_backward(head_, std::move(a.cache), g);
  sgd_step(head_, ba.param_grads, opts_.hp);
  compute += t.elapsed_ns();
  channel_.send(WireMessage{MsgType::step_done, s, {}});

  close_out(out, before, compute, wall);
  out.control_frames = channel_.control_frames() - control_before;
  return out;
}

void ClientSession::finish() {
  channel_.send(WireMessage{MsgType::bye, step_, {}});
  conn_.close();
}

void ClientSession::abort(const std::string& why) noexcept {
  channel_.send_error(why);
  try {
    conn_.close();
  } catch (...) {
  }
}

// ---------------------------------------------------------------- server

ServerSession::ServerSession(Connection& conn, const SplitPlan& plan, std::uint64_t seed, std::uint32_t max_payload)
    : ServerSession(conn, plan, build_segment(plan, 1, seed), seed, max_payload) {}

ServerSession::ServerSession(Connection& conn, const SplitPlan& plan, Segment segment, std::uint64_t seed,
                             std::uint32_t max_payload)
    : conn_(conn),
      plan_(plan),
      mode_(plan.mode()),
      seed_(seed),
      segment_(std::move(segment)),
      channel_(conn, max_payload) {
  if (mode_ == SplitMode::no_split) throw PlanError("a server session needs a plan with one or two cuts");
  const SegmentRole want = mode_ == SplitMode::double_split ? SegmentRole::B : SegmentRole::C;
  if (segment_.role() != want) {
    throw StateError("server segment must have role " + std::string(to_string(want)) + " in " +
                     std::string(to_string(mode_)) + "-split mode");
  }
}

WireMessage ServerSession::recv_tracked() {
  WireMessage m = channel_.recv();
  received_.push_back(m.type);
  if (m.type == MsgType::error) {
    throw ProtocolError("peer reported an error: " + std::string(m.payload.begin(), m.payload.end()));
  }
  return m;
}

wire::Hello ServerSession::handshake() {
  const WireMessage m = recv_tracked();
  if (m.type != MsgType::hello) throw ProtocolError("expected HELLO, got " + std::string(wire::to_string(m.type)));
  const wire::Hello hello = wire::decode_hello(m.payload);
  if (hello.plan_hash != plan_hash(plan_)) throw ProtocolError("plan hash mismatch: client and server run different plans");
  if (hello.mode != mode_) throw ProtocolError("split mode mismatch");
  if (hello.seed != seed_) throw ProtocolError("seed mismatch: parameters would not line up");
  if (!(hello.lr >= 0.0) || !std::isfinite(hello.lr)) throw ProtocolError("invalid learning rate in HELLO");
  if (hello.batch_size == 0) throw ProtocolError("invalid batch size in HELLO");
  hp_ = HyperParams{hello.lr, hello.batch_size};
  precision_ = hello.precision;
  channel_.send(WireMessage{MsgType::plan_ack, 0, wire::encode_u64(hello.plan_hash)});
  return hello;
}

TrainState ServerSession::run(const ServerObserver& observer) {
  TrainState state;
  try {
    handshake();
    while (serve_step(state, observer)) {
    }
  } catch (const ConnectionClosed& e) {
    state.clean_shutdown = false;
    state.diagnostic = std::string("connection lost: ") + e.what();
    throw;
  } catch (const std::exception& e) {
    state.clean_shutdown = false;
    channel_.send_error(e.what());
    conn_.close();
    throw;
  }
  conn_.close();
  return state;
}

bool ServerSession::serve_step(TrainState& state, const ServerObserver& observer) {
  const Stopwatch wall;
  const ChannelStats before = channel_.stats();
  const std::uint64_t transfer_before = channel_.transfer_ns();
  const WireMessage first = recv_tracked();
  if (first.type == MsgType::bye) return false;
  const std::uint64_t s = state.step + 1;
  if (first.type != MsgType::act_ab || first.step_id != s) {
    throw ProtocolError("expected ACT_AB for step " + std::to_string(s) + ", got " +
                        std::string(wire::to_string(first.type)) + " for step " + std::to_string(first.step_id));
  }

  std::uint64_t compute = 0;
  double loss = std::numeric_limits<double>::quiet_NaN();

  const auto mid_step_bye = [&](const WireMessage& m) {
    if (m.type != MsgType::bye) return false;
    state.clean_shutdown = false;
    state.diagnostic = "peer ended the session in the middle of step " + std::to_string(s);
    return true;
  };

  const Tensor input = channel_.open_tensor(first);
  Stopwatch t;
  ForwardResult fwd = segment_.forward(input, s);
  compute += t.elapsed_ns();

  if (mode_ == SplitMode::double_split) {
    channel_.send_tensor(MsgType::act_bc, s, fwd.output, precision_);
    const WireMessage gm = recv_tracked();
    if (mid_step_bye(gm)) return false;
    if (gm.type != MsgType::grad_cb || gm.step_id != s) {
      throw ProtocolError("expected GRAD_CB for step " + std::to_string(s) + ", got " +
                          std::string(wire::to_string(gm.type)) + " for step " + std::to_string(gm.step_id));
    }
    BoundaryGradient g{channel_.open_tensor(gm), s};
    t = Stopwatch();
    BackwardResult b = auxiliary_backward(segment_, std::move(fwd.cache), g);
    sgd_step(segment_, b.param_grads, hp_);
    compute += t.elapsed_ns();
    if (observer) observer(s, segment_);
    channel_.send_tensor(MsgType::grad_ba, s, b.grad_input, precision_);
  } else {
    const WireMessage lm = recv_tracked();
    if (mid_step_bye(lm)) return false;
    if (lm.type != MsgType::labels || lm.step_id != s) {
      throw ProtocolError("expected LABELS for step " + std::to_string(s) + ", got " +
                          std::string(wire::to_string(lm.type)));
    }
    const Tensor label_tensor = channel_.open_tensor(lm);
    t = Stopwatch();
    const auto labels = labels_from_tensor(label_tensor, input.dim(0), fwd.output.shape().back());
    const Tensor target = make_target(plan_.loss, labels, fwd.output.shape().back());
    const LossResult lr = loss_and_grad(plan_.loss, fwd.output, target);
    loss = lr.loss;
    state.correct += count_correct(fwd.output, labels);
    state.seen += labels.size();
    BackwardResult b = backward_from_loss(segment_, std::move(fwd.cache), lr.grad);
    sgd_step(segment_, b.param_grads, hp_);
    compute += t.elapsed_ns();
    if (observer) observer(s, segment_);
    channel_.send_tensor(MsgType::grad_ba, s, b.grad_input, precision_);
  }

  const WireMessage done = recv_tracked();
  if (mid_step_bye(done)) return false;
  if (done.type != MsgType::step_done || done.step_id != s) {
    throw ProtocolError("expected STEP_DONE for step " + std::to_string(s) + ", got " +
                        std::string(wire::to_string(done.type)));
  }

  TimingRecord rec;
  rec.step_id = s;
  rec.compute_ns = compute;
  rec.server_compute_ns = compute;
  rec.serialize_ns = channel_.stats().serialize_ns - before.serialize_ns;
  rec.transfer_ns = channel_.transfer_ns() - transfer_before;
  rec.bytes_sent = channel_.stats().bytes_sent - before.bytes_sent;
  rec.bytes_received = channel_.stats().bytes_received - before.bytes_received;
  rec.wall_ns = wall.elapsed_ns();
  for (const auto& t : channel_.take_traffic()) state.tensor_bytes += t.data_bytes;
  state.timings.push_back(rec);
  state.losses.push_back(loss);
  state.step = s;
  return true;
}

}  // namespace splitlearn
