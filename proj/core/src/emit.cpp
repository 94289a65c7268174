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

#include "oca/emit.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "oca/svg_plot.hpp"

namespace oca {
namespace {

void flush(std::ostream& out, const fmt::memory_buffer& buf) {
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::string series_label(Policy p, double kappa, bool show_kappa) {
  return show_kappa ? fmt::format("{} k={}", to_string(p), kappa) : std::string(to_string(p));
}

bool several_kappas(const RegretReport& report) {
  for (const auto& row : report.aggregate) {
    if (row.kappa != report.aggregate.front().kappa) return true;
  }
  return false;
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body,
                std::vector<std::string>& written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  body(out);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
  written.push_back(path.string());
}

}  // namespace

void write_runs_csv(std::ostream& out, const RegretReport& report) {
  fmt::memory_buffer buf;
  auto it = std::back_inserter(buf);
  fmt::format_to(it,
                 "model,policy,T,kappa,rep,stream_seed,algo_seed,reward_sum,reg_term,total_reward,benchmark,regret,"
                 "stopping_time,remaining_time,allocation_entropy,feasible,flagged\n");
  for (const RunRecord& r : report.runs) {
    fmt::format_to(it, "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(r.model), to_string(r.policy),
                   r.horizon, r.kappa, r.rep, r.stream_seed, r.algo_seed, r.reward_sum, r.reg_term, r.total_reward,
                   r.benchmark, r.regret, r.stopping_time, r.remaining_time(), r.allocation_entropy,
                   r.feasible ? 1 : 0, r.flagged ? 1 : 0);
  }
  flush(out, buf);
}

void write_aggregate_csv(std::ostream& out, const RegretReport& report) {
  fmt::memory_buffer buf;
  auto it = std::back_inserter(buf);
  fmt::format_to(it,
                 "model,policy,T,kappa,reps,benchmark,mean_regret,std_regret,mean_remaining_time,mean_total_reward,"
                 "mean_benchmark,mean_reward_per_step,mean_reg_per_step,infeasible,flagged\n");
  for (const AggregateRow& a : report.aggregate) {
    fmt::format_to(it, "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(a.model), to_string(a.policy),
                   a.horizon, a.kappa, a.reps, to_string(report.benchmark), a.mean_regret, a.std_regret,
                   a.mean_remaining_time, a.mean_total_reward, a.mean_benchmark, a.mean_reward_per_step,
                   a.mean_reg_per_step, a.infeasible, a.flagged);
  }
  flush(out, buf);
}

void write_regret_series_csv(std::ostream& out, const RegretReport& report) {
  fmt::memory_buffer buf;
  auto it = std::back_inserter(buf);
  fmt::format_to(it, "policy,kappa,T,mean_regret,std_regret,mean_remaining_time\n");
  std::map<std::tuple<double, int, int>, const AggregateRow*> ordered;
  for (const AggregateRow& a : report.aggregate) {
    ordered[{a.kappa, static_cast<int>(a.policy), a.horizon}] = &a;
  }
  for (const auto& [key, a] : ordered) {
    fmt::format_to(it, "{},{},{},{},{},{}\n", to_string(a->policy), a->kappa, a->horizon, a->mean_regret,
                   a->std_regret, a->mean_remaining_time);
  }
  flush(out, buf);
}

void write_resource_series_csv(std::ostream& out, const RegretReport& report) {
  fmt::memory_buffer buf;
  auto it = std::back_inserter(buf);
  fmt::format_to(it, "policy,T,kappa,resource,t,mean_remaining_fraction\n");
  for (const ResourceSeries& s : report.resources) {
    for (std::size_t k = 0; k < s.periods.size(); ++k) {
      fmt::format_to(it, "{},{},{},{},{},{}\n", to_string(s.policy), s.horizon, s.kappa, s.resource + 1,
                     s.periods[k], s.mean_fraction[k]);
    }
  }
  flush(out, buf);
}

void write_tradeoff_csv(std::ostream& out, const RegretReport& report) {
  fmt::memory_buffer buf;
  auto it = std::back_inserter(buf);
  fmt::format_to(it, "policy,T,kappa,rep,reward_per_step,allocation_entropy,reg_per_step\n");
  for (const RunRecord& r : report.runs) {
    fmt::format_to(it, "{},{},{},{},{},{},{}\n", to_string(r.policy), r.horizon, r.kappa, r.rep,
                   r.reward_sum / r.horizon, r.allocation_entropy, r.reg_term / r.horizon);
  }
  flush(out, buf);
}

std::vector<std::string> emit(const RegretReport& report, const std::string& dir, EmitFormat format) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  const fs::path root(dir);
  std::vector<std::string> written;
  write_file(root / "runs.csv", [&](std::ostream& o) { write_runs_csv(o, report); }, written);
  write_file(root / "aggregate.csv", [&](std::ostream& o) { write_aggregate_csv(o, report); }, written);
  write_file(root / "regret_vs_T.csv", [&](std::ostream& o) { write_regret_series_csv(o, report); }, written);
  write_file(root / "remaining_resource.csv", [&](std::ostream& o) { write_resource_series_csv(o, report); }, written);
  write_file(root / "tradeoff.csv", [&](std::ostream& o) { write_tradeoff_csv(o, report); }, written);
  if (format == EmitFormat::kCsv) return written;

  const bool show_kappa = several_kappas(report);
  std::map<std::pair<double, int>, PlotSeries> regret;
  int largest_t = 0;
  for (const AggregateRow& a : report.aggregate) {
    PlotSeries& s = regret[{a.kappa, static_cast<int>(a.policy)}];
    s.label = series_label(a.policy, a.kappa, show_kappa);
    s.x.push_back(a.horizon);
    s.y.push_back(a.mean_regret);
    largest_t = std::max(largest_t, a.horizon);
  }
  std::vector<PlotSeries> regret_series;
  for (auto& [key, s] : regret) {
    std::vector<std::size_t> order(s.x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.x[a] < s.x[b]; });
    PlotSeries sorted{s.label, {}, {}};
    for (std::size_t i : order) {
      sorted.x.push_back(s.x[i]);
      sorted.y.push_back(s.y[i]);
    }
    regret_series.push_back(std::move(sorted));
  }
  const std::string model(to_string(report.model));
  write_file(root / "regret_vs_T.svg",
             [&](std::ostream& o) {
               o << render_svg({"Regret versus horizon, input " + model, "T", "mean regret"}, regret_series);
             },
             written);

  std::vector<PlotSeries> resource_series;
  for (const ResourceSeries& rs : report.resources) {
    if (rs.horizon != largest_t) continue;
    PlotSeries s{series_label(rs.policy, rs.kappa, show_kappa), {}, rs.mean_fraction};
    for (int t : rs.periods) s.x.push_back(t);
    resource_series.push_back(std::move(s));
  }
  write_file(root / "remaining_resource.svg",
             [&](std::ostream& o) {
               o << render_svg({fmt::format("Remaining resource, T = {}", largest_t), "t", "B_t / (d T)"},
                               resource_series);
             },
             written);

  std::map<int, PlotSeries> trade;
  std::map<std::pair<int, double>, std::pair<double, double>> sums;
  std::map<std::pair<int, double>, int> counts;
  for (const RunRecord& r : report.runs) {
    if (r.horizon != largest_t) continue;
    auto& acc = sums[{static_cast<int>(r.policy), r.kappa}];
    acc.first += r.allocation_entropy;
    acc.second += r.reward_sum / r.horizon;
    counts[{static_cast<int>(r.policy), r.kappa}] += 1;
  }
  for (const auto& [key, acc] : sums) {
    PlotSeries& s = trade[key.first];
    s.label = std::string(to_string(static_cast<Policy>(key.first)));
    const double c = counts[key];
    s.x.push_back(acc.first / c);
    s.y.push_back(acc.second / c);
  }
  std::vector<PlotSeries> trade_series;
  for (auto& [key, s] : trade) trade_series.push_back(std::move(s));
  PlotSpec trade_spec{fmt::format("Per-step reward versus allocation entropy, T = {}", largest_t),
                      "allocation entropy", "reward per step"};
  trade_spec.lines = false;
  write_file(root / "tradeoff.svg", [&](std::ostream& o) { o << render_svg(trade_spec, trade_series); }, written);
  return written;
}

}  // namespace oca
