// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>

#include "splitlearn/dataset.hpp"
#include "splitlearn/link.hpp"
#include "splitlearn/plan.hpp"
#include "splitlearn/report.hpp"
#include "splitlearn/segment.hpp"
#include "splitlearn/wire.hpp"

namespace splitlearn {

enum class Role { server, client, simulate, oracle };

std::string_view to_string(Role role);

struct SessionConfig {
  Role role = Role::simulate;
  SplitPlan plan;
  std::uint64_t seed = 0;
  HyperParams hp;
  std::size_t epochs = 1;
  /// Stop after this many steps even mid-epoch.
  std::optional<std::size_t> max_steps;
  /// "host:port"; port 0 picks an ephemeral port for the server.
  std::string listen = "127.0.0.1:0";
  std::string connect;
  LinkModel link;
  wire::DType precision = wire::DType::f32;
  std::optional<std::filesystem::path> report;
};

/// Runs one role to completion. `data` is unused by the server. Progress
/// (one line per epoch) goes to `log` when given. `on_listening` receives
/// the bound port before the server blocks in accept.
RunSummary run_training(const SessionConfig& cfg, const Dataset* data, std::ostream* log = nullptr,
                        const std::function<void(std::uint16_t)>& on_listening = {});

}  // namespace splitlearn
