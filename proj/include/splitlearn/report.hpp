// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "splitlearn/timing.hpp"

namespace splitlearn {

struct RunSummary {
  std::string role;
  std::string mode;
  std::string plan;
  std::uint64_t steps = 0;
  std::uint64_t epochs = 0;
  std::optional<double> final_loss;
  /// Mean loss over the last epoch.
  std::optional<double> epoch_loss;
  std::optional<double> accuracy;
  std::uint64_t compute_ns = 0;
  std::uint64_t client_compute_ns = 0;
  std::uint64_t server_compute_ns = 0;
  std::uint64_t serialize_ns = 0;
  std::uint64_t transfer_ns = 0;
  std::uint64_t wall_ns = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
  /// Tensor element bytes; everything else on the wire is framing.
  std::uint64_t tensor_bytes = 0;
  bool labels_leave_client = false;
  bool clean_shutdown = true;
  std::string diagnostic;

  std::uint64_t total_ns() const noexcept { return compute_ns + serialize_ns + transfer_ns; }
};

/// JSON lines: one object per step, then one summary object.
class ReportWriter {
 public:
  explicit ReportWriter(const std::filesystem::path& path);

  void step(const TimingRecord& rec, std::uint64_t epoch, std::optional<double> loss);
  void summary(const RunSummary& s);

 private:
  std::ofstream out_;
};

std::string step_json(const TimingRecord& rec, std::uint64_t epoch, std::optional<double> loss);
std::string summary_json(const RunSummary& s);

}  // namespace splitlearn
