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

#include "oca/allocator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace oca {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw std::runtime_error("trace csv: cannot parse number '" + s + "'");
  return v;
}

}  // namespace

std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::kResolveSgd:
      return "resolve-sgd";
    case Policy::kResolveSgdStronglyConvex:
      return "resolve-sgd-sc";
    case Policy::kOgd:
      return "ogd";
    case Policy::kDualSaa:
      return "dual-saa";
    case Policy::kNonadaptive:
      return "nonadaptive";
    case Policy::kExactResolve:
      return "exact";
  }
  return "unknown";
}

Policy parse_policy(std::string_view name) {
  for (auto p : {Policy::kResolveSgd, Policy::kResolveSgdStronglyConvex, Policy::kOgd, Policy::kDualSaa,
                 Policy::kNonadaptive, Policy::kExactResolve}) {
    if (to_string(p) == name) return p;
  }
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

std::string_view to_string(AccuracyRule r) {
  switch (r) {
    case AccuracyRule::kInverseT:
      return "inv-t";
    case AccuracyRule::kInverseRemaining:
      return "inv-remaining";
    case AccuracyRule::kInverseT32:
      return "inv-t-1.5";
    case AccuracyRule::kInverseRemaining32:
      return "inv-remaining-1.5";
  }
  return "unknown";
}

AccuracyRule parse_accuracy_rule(std::string_view name) {
  for (auto r : {AccuracyRule::kInverseT, AccuracyRule::kInverseRemaining, AccuracyRule::kInverseT32,
                 AccuracyRule::kInverseRemaining32}) {
    if (to_string(r) == name) return r;
  }
  throw std::invalid_argument("unknown accuracy rule '" + std::string(name) + "'");
}

std::string_view to_string(KRule r) { return r == KRule::kBudgeted ? "budgeted" : "verbatim"; }

KRule parse_k_rule(std::string_view name) {
  if (name == "budgeted") return KRule::kBudgeted;
  if (name == "verbatim") return KRule::kVerbatim;
  throw std::invalid_argument("unknown k-rule '" + std::string(name) + "'");
}

std::string_view to_string(ScStep s) { return s == ScStep::kVerbatim ? "verbatim" : "conventional"; }

ScStep parse_sc_step(std::string_view name) {
  if (name == "verbatim") return ScStep::kVerbatim;
  if (name == "conventional") return ScStep::kConventional;
  throw std::invalid_argument("unknown strongly convex step rule '" + std::string(name) + "'");
}

void AllocatorConfig::validate() const {
  if (!(accuracy_scale > 0.0)) throw std::invalid_argument("AllocatorConfig: accuracy_scale must be > 0");
  if (k_max < 1) throw std::invalid_argument("AllocatorConfig: k_max must be >= 1");
  if (!(ogd_step > 0.0)) throw std::invalid_argument("AllocatorConfig: ogd_step must be > 0");
  if (!(sc_modulus > 0.0)) throw std::invalid_argument("AllocatorConfig: sc_modulus must be > 0");
  if (batch.max_iterations < 1) throw std::invalid_argument("AllocatorConfig: batch max_iterations must be >= 1");
}

bool AllocatorConfig::adaptive() const {
  return policy == Policy::kResolveSgd || policy == Policy::kResolveSgdStronglyConvex ||
         policy == Policy::kExactResolve;
}

double accuracy_at(const AllocatorConfig& cfg, int t, int horizon) {
  if (t < 1 || t >= horizon) {
    throw std::out_of_range("accuracy_at: period " + std::to_string(t) + " outside [1, " +
                            std::to_string(horizon) + ")");
  }
  const double ft = t;
  const double rest = horizon - t;
  switch (cfg.accuracy) {
    case AccuracyRule::kInverseT:
      return cfg.accuracy_scale / ft;
    case AccuracyRule::kInverseRemaining:
      return cfg.accuracy_scale / rest;
    case AccuracyRule::kInverseT32:
      return cfg.accuracy_scale / (ft * std::sqrt(ft));
    case AccuracyRule::kInverseRemaining32:
      return cfg.accuracy_scale / (rest * std::sqrt(rest));
  }
  return cfg.accuracy_scale;
}

std::int64_t sgd_steps_at(const AllocatorConfig& cfg, double radius, double lipschitz, int t, int horizon) {
  if (cfg.k_rule == KRule::kVerbatim) {
    const auto tt = static_cast<std::int64_t>(t);
    return tt * tt * tt;
  }
  const double ratio = radius * lipschitz / accuracy_at(cfg, t, horizon);
  const double k = std::ceil(ratio * ratio);
  if (!(k < static_cast<double>(cfg.k_max))) return cfg.k_max;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(k));
}

Allocator::Allocator(AllocatorConfig cfg, ProblemSpec spec, Regularizer reg, std::uint64_t seed)
    : cfg_(std::move(cfg)), spec_(std::move(spec)), reg_(std::move(reg)), rng_(seed) {
  cfg_.validate();
  spec_.validate();
  if (reg_.dim() != spec_.resources) {
    throw std::invalid_argument("Allocator: regularizer dimension does not match the resource count");
  }
  box_ = DualBox::from_spec(spec_);
  radius_ = sgd_radius(spec_);
  lipschitz_ = sgd_lipschitz(spec_);
  state_ = BudgetState::initial(spec_);
  dual_ = DualPoint::zero(spec_.resources, !reg_.pins_mu());
  history_.reserve(static_cast<std::size_t>(spec_.horizon));
}

StepRecord Allocator::step(const Request& req) {
  const int horizon = spec_.horizon;
  if (state_.step >= horizon) throw std::logic_error("Allocator::step: horizon exhausted");
  if (req.cost.rows() != spec_.resources) {
    throw std::invalid_argument("Allocator::step: cost matrix has the wrong number of rows");
  }
  StepRecord rec;
  rec.dual_used = dual_;
  const Vector proposal = primal_argmax(req.reward, req.cost, dual_.price());
  const Vector use = req.cost * proposal;
  for (Eigen::Index i = 0; i < use.size(); ++i) {
    if (state_.remaining[i] < use[i]) rec.blocked.push_back(static_cast<int>(i));
  }
  if (rec.blocked.empty()) {
    state_.remaining -= use;
    rec.action = proposal;
    rec.consumption = use;
  } else {
    rec.forced_void = true;
    rec.action = Vector::Zero(proposal.size());
    rec.consumption = Vector::Zero(use.size());
  }
  rec.reward = reward(req.reward, rec.action);
  history_.push_back(req);
  state_.step += 1;
  const int t = state_.step;
  if (t < horizon) {
    state_.avg_remaining = average_remaining(state_.remaining, horizon, t);
    rec.inner_steps = update_dual();
  } else {
    state_.avg_remaining = Vector::Constant(spec_.resources, kNaN);
  }
  return rec;
}

std::int64_t Allocator::update_dual() {
  const int t = state_.step;
  const int horizon = spec_.horizon;
  const Vector& d = cfg_.adaptive() ? state_.avg_remaining : spec_.avg_budget;
  const SaaDual all(history_, d, reg_, box_);
  switch (cfg_.policy) {
    case Policy::kResolveSgd:
    case Policy::kNonadaptive: {
      const std::int64_t k = sgd_steps_at(cfg_, radius_, lipschitz_, t, horizon);
      dual_ = sgd_solve(all, dual_, SgdSchedule::constant(k, radius_, lipschitz_), rng_);
      return k;
    }
    case Policy::kResolveSgdStronglyConvex: {
      const double c = cfg_.sc_step == ScStep::kVerbatim ? cfg_.sc_modulus : 1.0 / cfg_.sc_modulus;
      dual_ = sgd_solve(all, dual_, SgdSchedule::harmonic(t, c), rng_);
      return t;
    }
    case Policy::kOgd: {
      const SaaDual fresh(std::span<const Request>(&history_.back(), 1), d, reg_, box_);
      const Vector g = fresh.sample_gradient(0, dual_);
      const double eta = cfg_.ogd_step / t;
      const Eigen::Index m = spec_.resources;
      dual_.lambda -= eta * g.head(m);
      if (dual_.has_mu()) dual_.mu -= eta * g.tail(m);
      project_in_place(dual_, box_);
      return 1;
    }
    case Policy::kDualSaa:
    case Policy::kExactResolve: {
      const BatchResult res = batch_solve(all, dual_, accuracy_at(cfg_, t, horizon), cfg_.batch);
      dual_ = res.point;
      return res.iterations;
    }
  }
  return 0;
}

RunTrace run(const AllocatorConfig& cfg, const ProblemSpec& spec, const Regularizer& reg,
             std::span<const Request> stream, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const int horizon = spec.horizon;
  if (static_cast<int>(stream.size()) != horizon) {
    throw std::invalid_argument("run: stream has " + std::to_string(stream.size()) + " requests, expected " +
                                std::to_string(horizon));
  }
  Allocator alloc(cfg, spec, reg, seed);
  const int m = spec.resources;
  const int mu_cols = reg.pins_mu() ? 0 : m;
  const int n = horizon > 0 ? decision_dim(stream[0].reward) : spec.decision_dim;

  RunTrace tr;
  tr.horizon = horizon;
  tr.budget = spec.avg_budget;
  tr.lambda.resize(horizon, m);
  tr.mu.resize(horizon, mu_cols);
  tr.action.resize(horizon, n);
  tr.reward.resize(horizon);
  tr.consumption.resize(horizon, m);
  tr.remaining.resize(horizon, m);
  tr.avg_remaining.resize(horizon, m);
  tr.forced_void.assign(horizon, 0);
  tr.inner_steps.assign(horizon, 0);
  tr.stopping_time = horizon;
  tr.depletion_time.assign(m, horizon);

  for (int i = 0; i < horizon; ++i) {
    const StepRecord rec = alloc.step(stream[i]);
    const int t = i + 1;
    tr.lambda.row(i) = rec.dual_used.lambda.transpose();
    if (mu_cols > 0) tr.mu.row(i) = rec.dual_used.mu.transpose();
    if (rec.action.size() != n) throw std::invalid_argument("run: requests differ in decision dimension");
    tr.action.row(i) = rec.action.transpose();
    tr.reward[i] = rec.reward;
    tr.consumption.row(i) = rec.consumption.transpose();
    tr.remaining.row(i) = alloc.state().remaining.transpose();
    tr.avg_remaining.row(i) = alloc.state().avg_remaining.transpose();
    tr.forced_void[i] = rec.forced_void ? 1 : 0;
    tr.inner_steps[i] = rec.inner_steps;
    if (rec.forced_void && tr.stopping_time == horizon) tr.stopping_time = t;
    for (int dim : rec.blocked) tr.depletion_time[dim] = std::min(tr.depletion_time[dim], t);
  }
  tr.reward_sum = tr.reward.sum();
  tr.reg_term = regularizer_term(tr, reg);
  tr.total_reward = tr.reward_sum + tr.reg_term;
  tr.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return tr;
}

double regularizer_term(const RunTrace& trace, const Regularizer& reg) {
  if (reg.kind() == RegularizerKind::kNone || trace.horizon == 0) return 0.0;
  const double horizon = trace.horizon;
  return horizon * reg.value(trace.total_consumption() / horizon);
}

StoppingStats stopping_stats(std::span<const RunTrace> traces) {
  if (traces.empty()) throw std::invalid_argument("stopping_stats: no traces");
  StoppingStats s;
  s.runs = static_cast<int>(traces.size());
  std::vector<double> rem;
  rem.reserve(traces.size());
  for (const RunTrace& tr : traces) rem.push_back(tr.remaining_time());
  double sum = 0.0;
  for (double r : rem) sum += r;
  s.mean_remaining = sum / s.runs;
  double ss = 0.0;
  for (double r : rem) ss += (r - s.mean_remaining) * (r - s.mean_remaining);
  s.std_remaining = s.runs > 1 ? std::sqrt(ss / (s.runs - 1)) : 0.0;
  s.p10 = percentile(rem, 0.10);
  s.p50 = percentile(rem, 0.50);
  s.p90 = percentile(rem, 0.90);
  const std::size_t m = traces.front().depletion_time.size();
  s.mean_depletion_time.assign(m, 0.0);
  for (const RunTrace& tr : traces) {
    if (tr.depletion_time.size() != m) throw std::invalid_argument("stopping_stats: resource counts differ");
    for (std::size_t i = 0; i < m; ++i) s.mean_depletion_time[i] += tr.depletion_time[i];
  }
  for (double& v : s.mean_depletion_time) v /= s.runs;
  return s;
}

BindingDiagnostics binding_diagnostics(const RunTrace& trace, double delta, double threshold) {
  if (!(delta > 0.0)) throw std::invalid_argument("binding_diagnostics: delta must be > 0");
  const int horizon = trace.horizon;
  const Eigen::Index m = trace.budget.size();
  BindingDiagnostics out;
  out.exit_time.assign(m, horizon);
  out.trajectory = trace.avg_remaining.topRows(std::max(0, horizon - 1));
  for (Eigen::Index i = 0; i < m; ++i) {
    const double d = trace.budget[i];
    const double left = horizon > 0 ? trace.remaining(horizon - 1, i) / (d * horizon) : 1.0;
    const bool binding = left < threshold;
    (binding ? out.binding : out.non_binding).push_back(static_cast<int>(i));
    for (int r = 0; r + 1 < horizon; ++r) {
      const double dt = trace.avg_remaining(r, i);
      const bool out_of_region = binding ? std::abs(dt - d) > delta : dt < d - delta;
      if (out_of_region) {
        out.exit_time[i] = r + 1;
        break;
      }
    }
  }
  out.stopping_time = horizon;
  for (int e : out.exit_time) out.stopping_time = std::min(out.stopping_time, e);
  return out;
}

void write_trace_csv(std::ostream& out, const RunTrace& tr) {
  const Eigen::Index m = tr.lambda.cols();
  const Eigen::Index k = tr.mu.cols();
  const Eigen::Index n = tr.action.cols();
  fmt::memory_buffer buf;
  auto it = std::back_inserter(buf);
  fmt::format_to(it, "t");
  for (Eigen::Index i = 0; i < m; ++i) fmt::format_to(it, ",lambda_{}", i + 1);
  for (Eigen::Index i = 0; i < k; ++i) fmt::format_to(it, ",mu_{}", i + 1);
  for (Eigen::Index j = 0; j < n; ++j) fmt::format_to(it, ",action_{}", j + 1);
  fmt::format_to(it, ",reward");
  for (Eigen::Index i = 0; i < m; ++i) fmt::format_to(it, ",consumption_{}", i + 1);
  for (Eigen::Index i = 0; i < m; ++i) fmt::format_to(it, ",B_{}", i + 1);
  for (Eigen::Index i = 0; i < m; ++i) fmt::format_to(it, ",dt_{}", i + 1);
  fmt::format_to(it, ",void,inner_steps\n");
  for (int r = 0; r < tr.horizon; ++r) {
    fmt::format_to(it, "{}", r + 1);
    for (Eigen::Index i = 0; i < m; ++i) fmt::format_to(it, ",{}", tr.lambda(r, i));
    for (Eigen::Index i = 0; i < k; ++i) fmt::format_to(it, ",{}", tr.mu(r, i));
    for (Eigen::Index j = 0; j < n; ++j) fmt::format_to(it, ",{}", tr.action(r, j));
    fmt::format_to(it, ",{}", tr.reward[r]);
    for (Eigen::Index i = 0; i < m; ++i) fmt::format_to(it, ",{}", tr.consumption(r, i));
    for (Eigen::Index i = 0; i < m; ++i) fmt::format_to(it, ",{}", tr.remaining(r, i));
    for (Eigen::Index i = 0; i < m; ++i) fmt::format_to(it, ",{}", tr.avg_remaining(r, i));
    fmt::format_to(it, ",{},{}\n", static_cast<int>(tr.forced_void[r]), tr.inner_steps[r]);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_trace_csv(const std::string& path, const RunTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_trace_csv(out, trace);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

RunTrace read_trace_csv(std::istream& in, const Vector& budget) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace csv: missing header");
  const auto header = split_csv_line(line);
  auto count = [&](std::string_view prefix) {
    return static_cast<Eigen::Index>(std::count_if(header.begin(), header.end(), [&](const std::string& h) {
      return h.rfind(prefix, 0) == 0;
    }));
  };
  const Eigen::Index m = count("lambda_");
  const Eigen::Index k = count("mu_");
  const Eigen::Index n = count("action_");
  const auto width = static_cast<std::size_t>(1 + m + k + n + 1 + 3 * m + 2);
  if (header.size() != width || header.front() != "t" || count("consumption_") != m || count("B_") != m ||
      count("dt_") != m) {
    throw std::runtime_error("trace csv: unexpected header '" + line + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(split_csv_line(line));
    if (rows.back().size() != width) {
      throw std::runtime_error("trace csv: row " + std::to_string(rows.size()) + " has " +
                               std::to_string(rows.back().size()) + " cells, expected " + std::to_string(width));
    }
  }
  RunTrace tr;
  tr.horizon = static_cast<int>(rows.size());
  tr.budget = budget;
  const int horizon = tr.horizon;
  tr.lambda.resize(horizon, m);
  tr.mu.resize(horizon, k);
  tr.action.resize(horizon, n);
  tr.reward.resize(horizon);
  tr.consumption.resize(horizon, m);
  tr.remaining.resize(horizon, m);
  tr.avg_remaining.resize(horizon, m);
  tr.forced_void.assign(horizon, 0);
  tr.inner_steps.assign(horizon, 0);
  tr.stopping_time = horizon;
  for (int r = 0; r < horizon; ++r) {
    const auto& row = rows[r];
    std::size_t c = 1;
    for (Eigen::Index i = 0; i < m; ++i) tr.lambda(r, i) = parse_double(row[c++]);
    for (Eigen::Index i = 0; i < k; ++i) tr.mu(r, i) = parse_double(row[c++]);
    for (Eigen::Index j = 0; j < n; ++j) tr.action(r, j) = parse_double(row[c++]);
    tr.reward[r] = parse_double(row[c++]);
    for (Eigen::Index i = 0; i < m; ++i) tr.consumption(r, i) = parse_double(row[c++]);
    for (Eigen::Index i = 0; i < m; ++i) tr.remaining(r, i) = parse_double(row[c++]);
    for (Eigen::Index i = 0; i < m; ++i) tr.avg_remaining(r, i) = parse_double(row[c++]);
    tr.forced_void[r] = row[c++] == "1" ? 1 : 0;
    tr.inner_steps[r] = std::stoll(row[c++]);
    if (tr.forced_void[r] && tr.stopping_time == horizon) tr.stopping_time = r + 1;
  }
  tr.reward_sum = tr.reward.sum();
  tr.total_reward = tr.reward_sum;
  return tr;
}

RunTrace read_trace_csv(const std::string& path, const Vector& budget) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return read_trace_csv(in, budget);
}

}  // namespace oca
