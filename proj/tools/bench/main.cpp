// Copyright 2026 The OCA Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// bench: experiment driver.
//
//   bench run --model III --policy resolve-sgd,ogd --T 256,512 --reps 10 --seed 1 --out results
//   bench --config grid.toml run
//   bench export-stream --model I --T 100 --seed 3 --out stream.csv
//   bench replay --stream stream.csv --model I --policy ogd --out trace.csv

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oca/allocator.hpp"
#include "oca/emit.hpp"
#include "oca/experiment.hpp"
#include "oca/inputs.hpp"
#include "oca/stream_io.hpp"

namespace {

// Top-level keys of a config file belong to `run`; a [regularizer] table maps
// onto the --regularizer.* options.
class RunConfig : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    for (auto& item : items) {
      if (item.parents.empty()) {
        if (item.name != "++" && item.name != "--") item.parents = {"run"};
      } else if (item.parents.front() == "regularizer") {
        item.name = "regularizer." + item.name;
        item.parents = {"run"};
      } else if (item.parents.front() != "run") {
        item.parents.insert(item.parents.begin(), "run");
      }
    }
    return items;
  }
};

struct CommonArgs {
  std::string model = "III";
  std::uint64_t seed = 0;
  int resources = 0;
  int decision_dim = 0;
  std::string reg_kind;
  double huber_delta = 1.0;
  double entropy_mu_cap = 10.0;
};

struct AllocArgs {
  std::string k_rule = "budgeted";
  std::int64_t k_max = 1000000;
  std::string accuracy = "inv-t-1.5";
  double accuracy_scale = 1.0;
  double ogd_step = 1.0;
  double sc_modulus = 0.1;
  std::string sc_step = "verbatim";
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--model", a.model, "Input model: I, II, III, IV, lp, welfare")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Master seed")->capture_default_str();
  cmd->add_option("--resources", a.resources, "Resources m (0: model default)");
  cmd->add_option("--decision-dim", a.decision_dim, "Decision dimension n (0: model default)");
  cmd->add_option("--regularizer.kind", a.reg_kind, "none, l2, smooth-min, smooth-max, entropy, huber");
  cmd->add_option("--regularizer.delta", a.huber_delta, "Huber threshold")->capture_default_str();
  cmd->add_option("--regularizer.mu-cap", a.entropy_mu_cap, "Entropy mu box in units of kappa / sum(d)")
      ->capture_default_str();
}

void add_alloc(CLI::App* cmd, AllocArgs& a) {
  cmd->add_option("--k-rule", a.k_rule, "SGD inner steps: budgeted or verbatim (t^3)")->capture_default_str();
  cmd->add_option("--k-max", a.k_max, "Cap of the budgeted K-rule")->capture_default_str();
  cmd->add_option("--accuracy", a.accuracy, "inv-t, inv-remaining, inv-t-1.5, inv-remaining-1.5")
      ->capture_default_str();
  cmd->add_option("--accuracy-scale", a.accuracy_scale, "Multiplier of the accuracy schedule")->capture_default_str();
  cmd->add_option("--ogd-step", a.ogd_step, "OGD step numerator c in c / t")->capture_default_str();
  cmd->add_option("--sc-modulus", a.sc_modulus, "Strong convexity constant of resolve-sgd-sc")->capture_default_str();
  cmd->add_option("--sc-step", a.sc_step, "verbatim (c / k) or conventional (1 / (c k))")->capture_default_str();
}

oca::InputModelSpec input_spec(const CommonArgs& a) {
  oca::InputModelSpec in;
  in.model = oca::parse_input_model(a.model);
  in.resources = a.resources;
  in.decision_dim = a.decision_dim;
  in.huber_delta = a.huber_delta;
  in.entropy_mu_cap = a.entropy_mu_cap;
  if (!a.reg_kind.empty()) in.regularizer = oca::parse_regularizer_kind(a.reg_kind);
  return in;
}

oca::AllocatorConfig alloc_config(const AllocArgs& a) {
  oca::AllocatorConfig cfg;
  cfg.k_rule = oca::parse_k_rule(a.k_rule);
  cfg.k_max = a.k_max;
  cfg.accuracy = oca::parse_accuracy_rule(a.accuracy);
  cfg.accuracy_scale = a.accuracy_scale;
  cfg.ogd_step = a.ogd_step;
  cfg.sc_modulus = a.sc_modulus;
  cfg.sc_step = oca::parse_sc_step(a.sc_step);
  return cfg;
}

// CLI11 only reads --config before the subcommand name.
std::vector<std::string> hoist_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> front, rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      front.push_back(args[i]);
      front.push_back(args[++i]);
    } else if (args[i].rfind("--config=", 0) == 0) {
      front.push_back(args[i]);
    } else {
      rest.push_back(args[i]);
    }
  }
  front.insert(front.end(), rest.begin(), rest.end());
  std::reverse(front.begin(), front.end());
  return front;
}

int do_run(const CommonArgs& common, const AllocArgs& alloc, const std::vector<std::string>& policies,
           const std::vector<int>& horizons, const std::vector<double>& kappas, int reps, int threads,
           const std::string& benchmark, const std::string& out, const std::string& trace_dir, bool svg) {
  oca::ExperimentGrid grid;
  grid.input = input_spec(common);
  for (const auto& p : policies) grid.policies.push_back(oca::parse_policy(p));
  grid.horizons = horizons;
  grid.kappas = kappas.empty() ? std::vector<double>{0.0} : kappas;
  grid.reps = reps;
  grid.master_seed = common.seed;
  grid.alloc = alloc_config(alloc);
  grid.benchmark = oca::parse_benchmark(benchmark);
  grid.threads = threads;
  grid.keep_traces = !trace_dir.empty();
  const oca::RegretReport report = oca::regret_table(grid);
  const auto written = oca::emit(report, out, svg ? oca::EmitFormat::kCsvAndSvg : oca::EmitFormat::kCsv);
  if (!trace_dir.empty()) {
    std::filesystem::create_directories(trace_dir);
    for (const auto& r : report.runs) {
      const std::string path = (std::filesystem::path(trace_dir) /
                                fmt::format("trace_{}_T{}_k{}_r{}.csv", oca::to_string(r.policy), r.horizon,
                                            r.kappa, r.rep))
                                   .string();
      oca::write_trace_csv(path, *r.trace);
    }
  }
  fmt::print("{:<16}{:>8}{:>10}{:>14}{:>12}{:>14}{:>8}\n", "policy", "T", "kappa", "mean_regret", "std", "remaining",
             "flags");
  for (const auto& a : report.aggregate) {
    fmt::print("{:<16}{:>8}{:>10}{:>14.6g}{:>12.4g}{:>14.4g}{:>8}\n", oca::to_string(a.policy), a.horizon, a.kappa,
               a.mean_regret, a.std_regret, a.mean_remaining_time, a.infeasible + a.flagged);
  }
  for (const auto& w : written) fmt::print("wrote {}\n", w);
  for (const auto& a : report.aggregate) {
    if (a.infeasible > 0) {
      fmt::print(stderr, "error: {} infeasible run(s) for {} T={}\n", a.infeasible, oca::to_string(a.policy),
                 a.horizon);
      return 2;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online convex allocation experiment driver"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML file mirroring the run flags");
  app.config_formatter(std::make_shared<RunConfig>());

  CommonArgs common;
  AllocArgs alloc;

  auto* run_cmd = app.add_subcommand("run", "Run a policy x horizon x kappa x rep grid and emit CSV/SVG");
  std::vector<std::string> policies{"resolve-sgd"};
  std::vector<int> horizons{256};
  std::vector<double> kappas;
  int reps = 1;
  int threads = 0;
  std::string benchmark = "avg-dual";
  std::string out = "results";
  std::string trace_dir;
  bool no_svg = false;
  add_common(run_cmd, common);
  add_alloc(run_cmd, alloc);
  run_cmd->add_option("--policy", policies, "resolve-sgd, resolve-sgd-sc, ogd, dual-saa, nonadaptive, exact")
      ->delimiter(',')
      ->capture_default_str();
  run_cmd->add_option("--T", horizons, "Horizons")->delimiter(',')->capture_default_str();
  run_cmd->add_option("--kappa", kappas, "Regularization strengths (default 0)")->delimiter(',');
  run_cmd->add_option("--reps", reps, "Repetitions per cell")->capture_default_str()->check(CLI::PositiveNumber);
  run_cmd->add_option("--threads", threads, "Worker threads (0: hardware; BENCH_THREADS caps)");
  run_cmd->add_option("--benchmark", benchmark, "avg-dual or opt-dual")->capture_default_str();
  run_cmd->add_option("--out", out, "Output directory")->capture_default_str();
  run_cmd->add_option("--trace-dir", trace_dir, "Write one trace CSV per run here");
  run_cmd->add_flag("--no-svg", no_svg, "Skip the SVG plots");

  auto* export_cmd = app.add_subcommand("export-stream", "Write a generated request stream as CSV");
  CommonArgs ex_common;
  int ex_horizon = 256;
  double ex_kappa = 0.0;
  std::string ex_out;
  add_common(export_cmd, ex_common);
  export_cmd->add_option("--T", ex_horizon, "Horizon")->capture_default_str();
  export_cmd->add_option("--kappa", ex_kappa, "Regularization strength")->capture_default_str();
  export_cmd->add_option("--out", ex_out, "Stream CSV path")->required();

  auto* replay_cmd = app.add_subcommand("replay", "Run one policy on a stream CSV and write its trace");
  CommonArgs rp_common;
  AllocArgs rp_alloc;
  std::string rp_stream;
  std::string rp_policy = "resolve-sgd";
  double rp_kappa = 0.0;
  std::string rp_out;
  add_common(replay_cmd, rp_common);
  add_alloc(replay_cmd, rp_alloc);
  replay_cmd->add_option("--stream", rp_stream, "Stream CSV")->required();
  replay_cmd->add_option("--policy", rp_policy, "Policy")->capture_default_str();
  replay_cmd->add_option("--kappa", rp_kappa, "Regularization strength")->capture_default_str();
  replay_cmd->add_option("--out", rp_out, "Trace CSV path");

  std::vector<std::string> args = hoist_config(argc, argv);
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) {
      return do_run(common, alloc, policies, horizons, kappas, reps, threads, benchmark, out, trace_dir, !no_svg);
    }
    if (*export_cmd) {
      oca::InputModelSpec in = input_spec(ex_common);
      in.horizon = ex_horizon;
      in.kappa = ex_kappa;
      in.seed = ex_common.seed;
      const oca::Instance inst = oca::generate(in);
      oca::write_stream_csv(ex_out, inst.stream);
      fmt::print("wrote {} requests to {}\n", inst.stream.size(), ex_out);
      return 0;
    }
    if (*replay_cmd) {
      const std::vector<oca::Request> stream = oca::read_stream_csv(rp_stream);
      if (stream.empty()) throw std::runtime_error("stream '" + rp_stream + "' has no requests");
      oca::InputModelSpec in = input_spec(rp_common);
      in.horizon = static_cast<int>(stream.size());
      in.kappa = rp_kappa;
      in.seed = rp_common.seed;
      oca::Instance inst = oca::generate(in);
      inst.stream = stream;
      oca::AllocatorConfig cfg = alloc_config(rp_alloc);
      cfg.policy = oca::parse_policy(rp_policy);
      const oca::RunTrace tr = oca::run(cfg, inst.spec, inst.reg, inst.stream, rp_common.seed);
      const oca::DualPoint avg = oca::average_dual(tr);
      const double bench = oca::dual_benchmark(inst.stream, inst.spec, inst.reg, avg);
      fmt::print("T={} total_reward={} avg_dual_benchmark={} regret={} stopping_time={} feasible={}\n", tr.horizon,
                 tr.total_reward, bench, bench - tr.total_reward, tr.stopping_time,
                 oca::feasible(tr, inst.stream, inst.spec) ? "yes" : "no");
      if (!rp_out.empty()) {
        oca::write_trace_csv(rp_out, tr);
        fmt::print("wrote {}\n", rp_out);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
