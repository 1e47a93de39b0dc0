// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <future>

#include "json.hpp"
#include "splitlearn/error.hpp"
#include "splitlearn/runtime.hpp"

namespace splitlearn {
namespace {

const char* kMlp =
    "name = mlp\ninput = 8\nloss = cross_entropy\ncuts = 1, 3\n"
    "layer = dense units=16 activation=relu\nlayer = dense units=16 activation=relu\n"
    "layer = dense units=16 activation=relu\nlayer = dense units=4 activation=softmax\n";

SessionConfig base_config(Role role) {
  SessionConfig cfg;
  cfg.role = role;
  cfg.plan = parse_plan(kMlp);
  cfg.seed = 3;
  cfg.hp = HyperParams{0.05, 8};
  cfg.epochs = 2;
  return cfg;
}

std::vector<nlohmann::json> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<nlohmann::json> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(nlohmann::json::parse(line));
  return out;
}

TEST(RuntimeTest, OracleIgnoresNetworkSettings) {
  SessionConfig cfg = base_config(Role::oracle);
  cfg.connect = "not-an-address";
  cfg.listen = "also:not";
  cfg.link = LinkModel::from_ms_mbps(500, 0.001);
  const Dataset d = gen_synthetic(1, 64, {8}, 4);
  const RunSummary s = run_training(cfg, &d);
  EXPECT_EQ(s.steps, 16u);
  EXPECT_EQ(s.epochs, 2u);
  EXPECT_EQ(s.transfer_ns, 0u);
  EXPECT_EQ(s.mode, "none");
  ASSERT_TRUE(s.final_loss.has_value());
}

TEST(RuntimeTest, IdealSimulationMatchesOracle) {
  const Dataset d = gen_synthetic(1, 64, {8}, 4);
  SessionConfig sim = base_config(Role::simulate);
  sim.precision = wire::DType::f64;
  const RunSummary a = run_training(sim, &d);
  const RunSummary b = run_training(base_config(Role::oracle), &d);
  EXPECT_NEAR(*a.final_loss, *b.final_loss, 1e-12);
  EXPECT_NEAR(*a.epoch_loss, *b.epoch_loss, 1e-12);
  EXPECT_EQ(a.accuracy, b.accuracy);
  EXPECT_EQ(a.transfer_ns, 0u);
}

TEST(RuntimeTest, ReportRecordsAreSelfConsistent) {
  const auto path = std::filesystem::temp_directory_path() / "splitlearn_runtime_report.jsonl";
  SessionConfig cfg = base_config(Role::simulate);
  cfg.link = LinkModel::from_ms_mbps(2, 100);
  cfg.report = path;
  const Dataset d = gen_synthetic(1, 64, {8}, 4);
  const RunSummary s = run_training(cfg, &d);
  const auto lines = read_lines(path);
  ASSERT_EQ(lines.size(), s.steps + 1);
  std::uint64_t bytes = 0;
  for (std::size_t i = 0; i < s.steps; ++i) {
    const auto& j = lines[i];
    EXPECT_EQ(j["type"], "step");
    EXPECT_EQ(j["step_id"].get<std::uint64_t>(), i + 1);
    for (const char* key : {"loss", "compute_ns", "serialize_ns", "transfer_ns", "bytes_sent", "bytes_received"}) {
      EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j["total_ns"].get<std::uint64_t>(), j["compute_ns"].get<std::uint64_t>() +
                                                       j["serialize_ns"].get<std::uint64_t>() +
                                                       j["transfer_ns"].get<std::uint64_t>());
    bytes += j["bytes_sent"].get<std::uint64_t>() + j["bytes_received"].get<std::uint64_t>();
  }
  const auto& summary = lines.back();
  EXPECT_EQ(summary["type"], "summary");
  EXPECT_EQ(summary["bytes_sent"].get<std::uint64_t>() + summary["bytes_received"].get<std::uint64_t>(), bytes);
  EXPECT_EQ(summary["tensor_bytes"].get<std::uint64_t>(), s.steps * 4 * (4 * 8 * 16));
  EXPECT_FALSE(summary["labels_leave_client"].get<bool>());
  std::filesystem::remove(path);
}

// With an ideal link the measured wall time is the components plus thread
// hand-off overhead.
TEST(RuntimeTest, WallTimeCoversComponents) {
  SessionConfig cfg = base_config(Role::simulate);
  cfg.epochs = 5;
  const Dataset d = gen_synthetic(1, 256, {8}, 4);
  const RunSummary s = run_training(cfg, &d);
  EXPECT_EQ(s.transfer_ns, 0u);
  EXPECT_GT(s.wall_ns, 0u);
  EXPECT_LE(s.client_compute_ns, s.wall_ns);
  EXPECT_LE(s.total_ns(), s.wall_ns + s.wall_ns / 2 + 5'000'000);
}

TEST(RuntimeTest, SingleSplitFlagsWeakerIsolation) {
  SessionConfig cfg = base_config(Role::simulate);
  cfg.plan = with_cuts(cfg.plan, {2});
  const Dataset d = gen_synthetic(1, 32, {8}, 4);
  const RunSummary s = run_training(cfg, &d);
  EXPECT_TRUE(s.labels_leave_client);
  EXPECT_EQ(s.mode, "single");
  EXPECT_TRUE(s.final_loss.has_value());
}

TEST(RuntimeTest, ConfigErrorsBeforeNetwork) {
  SessionConfig cfg = base_config(Role::client);
  cfg.connect = "127.0.0.1:1";
  const Dataset wrong = gen_synthetic(1, 32, {9}, 4);
  EXPECT_THROW(run_training(cfg, &wrong), DimensionError);
  EXPECT_THROW(run_training(cfg, nullptr), std::invalid_argument);
  cfg.plan = with_cuts(cfg.plan, {0});
  const Dataset d = gen_synthetic(1, 32, {8}, 4);
  EXPECT_THROW(run_training(cfg, &d), PlanError);
}

TEST(RuntimeTest, ClientServerOverTcp) {
  std::promise<std::uint16_t> port;
  SessionConfig server = base_config(Role::server);
  server.listen = "127.0.0.1:0";
  auto served = std::async(std::launch::async, [&] {
    return run_training(server, nullptr, nullptr, [&port](std::uint16_t p) { port.set_value(p); });
  });
  SessionConfig client = base_config(Role::client);
  client.connect = "127.0.0.1:" + std::to_string(port.get_future().get());
  const Dataset d = gen_synthetic(1, 64, {8}, 4);
  const RunSummary c = run_training(client, &d);
  const RunSummary s = served.get();
  EXPECT_EQ(c.steps, 16u);
  EXPECT_EQ(s.steps, 16u);
  EXPECT_TRUE(s.clean_shutdown);
  EXPECT_EQ(c.bytes_sent, s.bytes_received);
  EXPECT_EQ(c.bytes_received, s.bytes_sent);
  EXPECT_EQ(c.tensor_bytes, s.tensor_bytes);
}

}  // namespace
}  // namespace splitlearn
