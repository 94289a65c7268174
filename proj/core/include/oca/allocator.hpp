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

// Online allocation policies. Every policy runs the same per-period loop:
//
//   1. x~_t = argmax f_t(x) - (lambda + mu)' b_t x at the current dual
//   2. take x~_t if B_{t-1} >= b_t x~_t, else the void action
//   3. d_t = B_t / (T - t)
//   4. update the dual (skipped after the last period)
//
// and differs only in step 4.

#ifndef OCA_ALLOCATOR_HPP_
#define OCA_ALLOCATOR_HPP_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oca/dual_solver.hpp"
#include "oca/problem.hpp"
#include "oca/regularizer.hpp"
#include "oca/reward.hpp"

namespace oca {

enum class Policy {
  kResolveSgd,                // SGD re-solve on D_t(., d_t), averaged iterate
  kResolveSgdStronglyConvex,  // K = t harmonic-step SGD, last iterate
  kOgd,                       // one projected step per period, fixed d
  kDualSaa,                   // batch re-solve with fixed d
  kNonadaptive,               // kResolveSgd with d_t = d
  kExactResolve,              // batch re-solve on D_t(., d_t)
};

std::string_view to_string(Policy p);
/// resolve-sgd, resolve-sgd-sc, ogd, dual-saa, nonadaptive, exact.
Policy parse_policy(std::string_view name);

/// eps_t = scale * rate(t).
enum class AccuracyRule { kInverseT, kInverseRemaining, kInverseT32, kInverseRemaining32 };
std::string_view to_string(AccuracyRule r);
/// inv-t, inv-remaining, inv-t-1.5, inv-remaining-1.5.
AccuracyRule parse_accuracy_rule(std::string_view name);

enum class KRule { kBudgeted, kVerbatim };
std::string_view to_string(KRule r);
KRule parse_k_rule(std::string_view name);

/// Step numerator of the strongly convex variant: c = modulus (verbatim) or
/// c = 1 / modulus (conventional).
enum class ScStep { kVerbatim, kConventional };
std::string_view to_string(ScStep s);
ScStep parse_sc_step(std::string_view name);

struct AllocatorConfig {
  Policy policy = Policy::kResolveSgd;
  AccuracyRule accuracy = AccuracyRule::kInverseT32;
  double accuracy_scale = 1.0;
  KRule k_rule = KRule::kBudgeted;
  std::int64_t k_max = 1000000;
  double ogd_step = 1.0;
  double sc_modulus = 0.1;
  ScStep sc_step = ScStep::kVerbatim;
  BatchOptions batch;

  void validate() const;
  bool adaptive() const;
};

/// eps_t for period t in [1, T).
double accuracy_at(const AllocatorConfig& cfg, int t, int horizon);
/// SGD inner steps at period t: t^3 (verbatim) or
/// min(k_max, max(1, ceil((R L / eps_t)^2))) (budgeted).
std::int64_t sgd_steps_at(const AllocatorConfig& cfg, double radius, double lipschitz, int t, int horizon);

struct StepRecord {
  DualPoint dual_used;
  Vector action;
  double reward = 0.0;
  Vector consumption;
  bool forced_void = false;
  std::vector<int> blocked;  // resources that could not cover x~_t
  std::int64_t inner_steps = 0;
};

class Allocator {
 public:
  Allocator(AllocatorConfig cfg, ProblemSpec spec, Regularizer reg, std::uint64_t seed);

  /// One period. Throws std::logic_error once all T periods are used.
  StepRecord step(const Request& req);

  const BudgetState& state() const { return state_; }
  const DualPoint& dual() const { return dual_; }
  std::span<const Request> history() const { return history_; }
  const ProblemSpec& spec() const { return spec_; }

 private:
  std::int64_t update_dual();

  AllocatorConfig cfg_;
  ProblemSpec spec_;
  Regularizer reg_;
  DualBox box_;
  double radius_;
  double lipschitz_;
  std::mt19937_64 rng_;
  BudgetState state_;
  DualPoint dual_;
  std::vector<Request> history_;
};

/// Per-period record of one run. Row t - 1 belongs to period t.
struct RunTrace {
  int horizon = 0;
  Vector budget;      // d
  Matrix lambda;      // T x m, dual used for the decision
  Matrix mu;          // T x m, or T x 0 when mu is pinned
  Matrix action;      // T x n
  Vector reward;      // f_t(x_t)
  Matrix consumption; // T x m, b_t x_t
  Matrix remaining;   // T x m, B_t
  Matrix avg_remaining;  // T x m, B_t / (T - t); NaN in the last row
  std::vector<char> forced_void;
  std::vector<std::int64_t> inner_steps;

  int stopping_time = 0;           // first forced void, or T
  std::vector<int> depletion_time; // per resource: first period it blocked an action, or T
  double reward_sum = 0.0;
  double reg_term = 0.0;           // T r(sum_t b_t x_t / T)
  double total_reward = 0.0;
  double wall_seconds = 0.0;

  int remaining_time() const { return horizon - stopping_time; }
  Vector total_consumption() const { return consumption.colwise().sum().transpose(); }
};

/// Runs T = spec.horizon periods over `stream` (length T).
RunTrace run(const AllocatorConfig& cfg, const ProblemSpec& spec, const Regularizer& reg,
             std::span<const Request> stream, std::uint64_t seed);

/// T r(sum consumption / T) for a trace.
double regularizer_term(const RunTrace& trace, const Regularizer& reg);

struct StoppingStats {
  int runs = 0;
  double mean_remaining = 0.0;
  double std_remaining = 0.0;
  double p10 = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
  std::vector<double> mean_depletion_time;  // per resource
};

/// Throws std::invalid_argument on an empty list.
StoppingStats stopping_stats(std::span<const RunTrace> traces);

struct BindingDiagnostics {
  std::vector<int> binding;
  std::vector<int> non_binding;
  /// Per resource: first period whose d_t left [d_i - delta, d_i + delta]
  /// (binding) or fell below d_i - delta (non-binding); T if never.
  std::vector<int> exit_time;
  int stopping_time = 0;  // min over exit_time
  Matrix trajectory;      // (T - 1) x m of d_t
};

/// Resources whose final B_i / (d_i T) is below `threshold` are binding.
BindingDiagnostics binding_diagnostics(const RunTrace& trace, double delta, double threshold = 0.05);

/// One CSV per run: t, lambda_i, mu_i, action_j, reward, consumption_i, B_i,
/// dt_i, void, inner_steps.
void write_trace_csv(std::ostream& out, const RunTrace& trace);
void write_trace_csv(const std::string& path, const RunTrace& trace);
/// Restores the per-period columns. Summary fields are recomputed except
/// reg_term, which needs the regularizer (see regularizer_term).
RunTrace read_trace_csv(std::istream& in, const Vector& budget);
RunTrace read_trace_csv(const std::string& path, const Vector& budget);

}  // namespace oca

#endif  // OCA_ALLOCATOR_HPP_
