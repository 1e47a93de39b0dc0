// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: train as server, client, in-process simulation or
// unsplit oracle; sweep cut locations; inspect plans.

#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "splitlearn/dataset.hpp"
#include "splitlearn/harness.hpp"
#include "splitlearn/plan.hpp"
#include "splitlearn/report.hpp"
#include "splitlearn/runtime.hpp"

using namespace splitlearn;

namespace {

struct DataArgs {
  std::string source = "synthetic";
  std::string images;
  std::string labels;
  std::size_t samples = 256;
  std::uint64_t data_seed = 7;
};

struct TrainArgs {
  std::string plan;
  std::string mode;
  std::vector<std::size_t> cuts;
  std::uint64_t seed = 0;
  std::size_t epochs = 1;
  std::size_t batch = 16;
  double lr = 0.05;
  std::optional<std::size_t> max_steps;
  std::string report;
  std::string precision = "f32";
  DataArgs data;
};

void add_plan_options(CLI::App* cmd, TrainArgs& a) {
  cmd->add_option("--plan", a.plan, "Plan file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--cuts", a.cuts, "Override the plan's cut indices")->delimiter(',');
  cmd->add_option("--seed", a.seed, "Parameter seed shared by both parties");
}

void add_train_options(CLI::App* cmd, TrainArgs& a) {
  add_plan_options(cmd, a);
  cmd->add_option("--data", a.data.source, "synthetic or idx")->check(CLI::IsMember({"synthetic", "idx"}));
  cmd->add_option("--images", a.data.images, "IDX image file (with --data idx)");
  cmd->add_option("--labels", a.data.labels, "IDX label file (with --data idx)");
  cmd->add_option("--samples", a.data.samples, "Synthetic sample count");
  cmd->add_option("--data-seed", a.data.data_seed, "Synthetic data seed");
  cmd->add_option("--epochs", a.epochs, "Passes over the data")->check(CLI::PositiveNumber);
  cmd->add_option("--batch-size", a.batch, "Samples per step")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", a.lr, "SGD learning rate")->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-steps", a.max_steps, "Stop after this many steps");
  cmd->add_option("--report", a.report, "Write JSON-lines metrics here");
}

SplitPlan resolve_plan(const TrainArgs& a) {
  SplitPlan plan = load_plan(a.plan);
  if (!a.cuts.empty()) plan = with_cuts(plan, a.cuts);
  if (!a.mode.empty() && a.mode != to_string(plan.mode())) {
    throw std::invalid_argument("--mode " + a.mode + " does not match the plan's cuts (" +
                                std::string(to_string(plan.mode())) + "); pass --cuts to re-cut it");
  }
  validate_plan(plan);
  return plan;
}

Dataset resolve_data(const DataArgs& d, const SplitPlan& plan) {
  const PlanLayout layout = validate_plan(plan);
  if (d.source == "idx") {
    if (d.images.empty() || d.labels.empty()) throw std::invalid_argument("--data idx needs --images and --labels");
    Dataset data = load_idx(d.images, d.labels);
    if (data.sample_shape != plan.input_shape) data = data.reshaped(plan.input_shape);
    return data;
  }
  return gen_synthetic(d.data_seed, d.samples, plan.input_shape, layout.output_shape.back());
}

SessionConfig make_config(Role role, const TrainArgs& a, const SplitPlan& plan) {
  SessionConfig cfg;
  cfg.role = role;
  cfg.plan = plan;
  cfg.seed = a.seed;
  cfg.hp = HyperParams{a.lr, a.batch};
  cfg.epochs = a.epochs;
  cfg.max_steps = a.max_steps;
  cfg.precision = a.precision == "f64" ? wire::DType::f64 : wire::DType::f32;
  if (!a.report.empty()) cfg.report = a.report;
  return cfg;
}

void print_summary(const RunSummary& s) {
  std::cout << summary_json(s) << '\n';
}

int cmd_plan(const TrainArgs& a) {
  const SplitPlan plan = resolve_plan(a);
  const PlanLayout layout = validate_plan(plan);
  std::cout << "plan " << plan.name << " (" << to_string(layout.mode) << " split, hash " << std::hex
            << plan_hash(plan) << std::dec << ")\n";
  std::cout << "input " << to_string(plan.input_shape) << '\n';
  for (std::size_t i = 0; i < plan.layers.size(); ++i) {
    for (std::size_t c = 0; c < plan.cuts.size(); ++c) {
      if (plan.cuts[c] == i) {
        std::cout << "  -- cut " << c + 1 << ": " << element_count(layout.boundary_shapes[c])
                  << " elements per sample\n";
      }
    }
    std::cout << "  " << std::setw(2) << i + 1 << ' ' << std::left << std::setw(8) << to_string(plan.layers[i].kind)
              << std::right << to_string(layout.layer_shapes[i]) << '\n';
  }
  for (std::size_t s = 0; s < layout.segments.size(); ++s) {
    std::cout << "segment " << to_string(layout.roles[s]) << ": layers " << layout.segments[s].first_layer + 1 << ".."
              << layout.segments[s].first_layer + layout.segments[s].layers.size() << '\n';
  }
  return 0;
}

int cmd_sweep(const TrainArgs& a, const std::vector<std::string>& candidates, double latency_ms, double mbps,
              std::size_t steps) {
  const SplitPlan plan = load_plan(a.plan);
  std::vector<std::vector<std::size_t>> cut_lists;
  for (const auto& c : candidates) {
    std::vector<std::size_t> cuts;
    std::stringstream ss(c);
    std::string part;
    while (std::getline(ss, part, ',')) cuts.push_back(std::stoul(part));
    cut_lists.push_back(std::move(cuts));
  }
  const Dataset data = resolve_data(a.data, without_cuts(plan));
  const auto rows = split_location_sweep(plan, cut_lists, LinkModel::from_ms_mbps(latency_ms, mbps), data,
                                         HyperParams{a.lr, a.batch}, a.seed, steps);
  std::cout << "cuts        boundary    client_ms   server_ms   serialize_ms  transfer_ms  total_ms\n";
  for (const auto& r : rows) {
    std::ostringstream cuts;
    for (std::size_t i = 0; i < r.cuts.size(); ++i) cuts << (i ? "," : "") << r.cuts[i];
    std::cout << std::left << std::setw(12) << cuts.str() << std::right;
    if (r.skipped) {
      std::cout << "skipped: " << r.reason << '\n';
      continue;
    }
    std::cout << std::setw(9) << r.boundary_elements << std::fixed << std::setprecision(3) << std::setw(12)
              << r.client_compute_ns / 1e6 << std::setw(12) << r.server_compute_ns / 1e6 << std::setw(14)
              << r.serialize_ns / 1e6 << std::setw(13) << r.transfer_ns / 1e6 << std::setw(10) << r.total_ns / 1e6
              << '\n'
              << std::defaultfloat;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Split learning over a network boundary"};
  app.require_subcommand(1);

  TrainArgs args;
  std::string listen = "127.0.0.1:0";
  std::string connect;
  double latency_ms = 0.0, mbps = 0.0;
  std::vector<std::string> candidates;
  std::size_t sweep_steps = 1;

  auto* server = app.add_subcommand("server", "Run the server side of a split plan");
  add_plan_options(server, args);
  server->add_option("--listen", listen, "host:port to bind (port 0 picks one)");
  server->add_option("--report", args.report, "Write JSON-lines metrics here");

  auto* client = app.add_subcommand("client", "Run the device side against a server");
  add_train_options(client, args);
  client->add_option("--connect", connect, "Server host:port")->required();
  client->add_option("--mode", args.mode, "single or double; must match the cuts")
      ->check(CLI::IsMember({"single", "double"}));
  client->add_option("--precision", args.precision, "Wire element type")->check(CLI::IsMember({"f32", "f64"}));

  auto* simulate = app.add_subcommand("simulate", "Both parties in one process over a modeled link");
  add_train_options(simulate, args);
  simulate->add_option("--latency-ms", latency_ms, "One-way latency per message");
  simulate->add_option("--bandwidth-mbps", mbps, "Link bandwidth in megabits per second (0 = unlimited)");
  simulate->add_option("--precision", args.precision, "Wire element type")->check(CLI::IsMember({"f32", "f64"}));

  auto* oracle = app.add_subcommand("oracle", "Train the unsplit network as a reference");
  add_train_options(oracle, args);

  auto* sweep = app.add_subcommand("sweep", "Time a few steps at each candidate cut");
  add_train_options(sweep, args);
  sweep->add_option("--candidates", candidates, "Cut lists, e.g. --candidates 1,9 4,9 7,9")->required();
  sweep->add_option("--latency-ms", latency_ms, "One-way latency per message");
  sweep->add_option("--bandwidth-mbps", mbps, "Link bandwidth in megabits per second (0 = unlimited)");
  sweep->add_option("--steps", sweep_steps, "Steps timed per candidate")->check(CLI::PositiveNumber);

  auto* plan_cmd = app.add_subcommand("plan", "Validate a plan and print its shapes");
  add_plan_options(plan_cmd, args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan_cmd) return cmd_plan(args);
    if (*sweep) return cmd_sweep(args, candidates, latency_ms, mbps, sweep_steps);
    const SplitPlan plan = resolve_plan(args);
    if (*server) {
      SessionConfig cfg = make_config(Role::server, args, plan);
      cfg.listen = listen;
      print_summary(run_training(cfg, nullptr, &std::cerr));
      return 0;
    }
    const Dataset data = resolve_data(args.data, plan);
    SessionConfig cfg = make_config(*client ? Role::client : *simulate ? Role::simulate : Role::oracle, args, plan);
    cfg.connect = connect;
    cfg.link = LinkModel::from_ms_mbps(latency_ms, mbps);
    print_summary(run_training(cfg, &data, &std::cerr));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
