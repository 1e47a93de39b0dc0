// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitlearn/report.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace splitlearn {

namespace {

nlohmann::json maybe(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

}  // namespace

std::string step_json(const TimingRecord& rec, std::uint64_t epoch, std::optional<double> loss) {
  nlohmann::json j;
  j["type"] = "step";
  j["step_id"] = rec.step_id;
  j["epoch"] = epoch;
  j["loss"] = maybe(loss);
  j["compute_ns"] = rec.compute_ns;
  j["client_compute_ns"] = rec.client_compute_ns;
  j["server_compute_ns"] = rec.server_compute_ns;
  j["serialize_ns"] = rec.serialize_ns;
  j["transfer_ns"] = rec.transfer_ns;
  j["total_ns"] = rec.total_ns();
  j["wall_ns"] = rec.wall_ns;
  j["bytes_sent"] = rec.bytes_sent;
  j["bytes_received"] = rec.bytes_received;
  return j.dump();
}

std::string summary_json(const RunSummary& s) {
  nlohmann::json j;
  j["type"] = "summary";
  j["role"] = s.role;
  j["mode"] = s.mode;
  j["plan"] = s.plan;
  j["steps"] = s.steps;
  j["epochs"] = s.epochs;
  j["final_loss"] = maybe(s.final_loss);
  j["epoch_loss"] = maybe(s.epoch_loss);
  j["accuracy"] = maybe(s.accuracy);
  j["compute_ns"] = s.compute_ns;
  j["client_compute_ns"] = s.client_compute_ns;
  j["server_compute_ns"] = s.server_compute_ns;
  j["serialize_ns"] = s.serialize_ns;
  j["transfer_ns"] = s.transfer_ns;
  j["total_ns"] = s.total_ns();
  j["wall_ns"] = s.wall_ns;
  j["bytes_sent"] = s.bytes_sent;
  j["bytes_received"] = s.bytes_received;
  j["tensor_bytes"] = s.tensor_bytes;
  j["framing_bytes"] = s.bytes_sent + s.bytes_received - s.tensor_bytes;
  j["labels_leave_client"] = s.labels_leave_client;
  j["clean_shutdown"] = s.clean_shutdown;
  if (!s.diagnostic.empty()) j["diagnostic"] = s.diagnostic;
  return j.dump();
}

ReportWriter::ReportWriter(const std::filesystem::path& path) : out_(path) {
  if (!out_) throw std::runtime_error("cannot write report to " + path.string());
}

void ReportWriter::step(const TimingRecord& rec, std::uint64_t epoch, std::optional<double> loss) {
  out_ << step_json(rec, epoch, loss) << '\n';
}

void ReportWriter::summary(const RunSummary& s) {
  out_ << summary_json(s) << '\n';
  out_.flush();
}

}  // namespace splitlearn
