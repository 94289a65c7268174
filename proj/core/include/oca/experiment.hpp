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

// Regret measurement. The benchmark for a realized stream is T times the
// empirical dual at some dual point; by weak duality any point of the box
// upper-bounds the hindsight optimum of that stream.

#ifndef OCA_EXPERIMENT_HPP_
#define OCA_EXPERIMENT_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oca/allocator.hpp"
#include "oca/inputs.hpp"

namespace oca {

/// T * D_T(dual; d) over `history` with the original budget.
double dual_benchmark(std::span<const Request> history, const ProblemSpec& spec, const Regularizer& reg,
                      const DualPoint& dual);

/// Uniform average of the duals a run used for its decisions.
DualPoint average_dual(const RunTrace& trace);

/// batch_solve of D_T(.; d) from the origin.
BatchResult optimal_dual(std::span<const Request> history, const ProblemSpec& spec, const Regularizer& reg,
                         double tol = 1e-10);

/// Hindsight optimum over the grid {0, h, 2h, ..., D}^T. Requires T <= 8 and
/// n = 1. Throws std::invalid_argument on a guard violation and
/// std::length_error if a regularized search exceeds `state_cap` states.
double offline_bruteforce(std::span<const Request> requests, const ProblemSpec& spec, const Regularizer& reg,
                          double grid_step, std::size_t state_cap = 20000000);

enum class BenchmarkKind { kAvgDual, kOptDual };
std::string_view to_string(BenchmarkKind k);
/// avg-dual, opt-dual.
BenchmarkKind parse_benchmark(std::string_view name);

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);
/// Stream seed shared by all policies of one (T, rep) cell.
std::uint64_t stream_seed(std::uint64_t master, int horizon, int rep);
/// Algorithm seed of one (policy, T, rep) cell.
std::uint64_t algorithm_seed(std::uint64_t master, Policy policy, int horizon, int rep);

struct ExperimentGrid {
  InputModelSpec input;  // horizon, kappa and seed are overridden per cell
  std::vector<Policy> policies;
  std::vector<int> horizons;
  std::vector<double> kappas{0.0};
  int reps = 1;
  std::uint64_t master_seed = 0;
  AllocatorConfig alloc;  // policy overridden per cell
  BenchmarkKind benchmark = BenchmarkKind::kAvgDual;
  int threads = 0;           // 0: hardware count (BENCH_THREADS caps either)
  bool keep_traces = false;

  void validate() const;
};

struct RunRecord {
  InputModel model = InputModel::kIII;
  Policy policy = Policy::kResolveSgd;
  int horizon = 0;
  double kappa = 0.0;
  int rep = 0;
  std::uint64_t stream_seed = 0;
  std::uint64_t algo_seed = 0;
  double reward_sum = 0.0;
  double reg_term = 0.0;
  double total_reward = 0.0;
  double benchmark = 0.0;
  double regret = 0.0;
  int stopping_time = 0;
  bool feasible = false;
  bool flagged = false;  // regret < -1e-6
  std::vector<int> depletion_time;
  Vector remaining_fraction;  // final B_i / (d_i T)
  double allocation_entropy = 0.0;  // -sum u log u, u = average consumption / sum(d)
  double wall_seconds = 0.0;
  std::optional<RunTrace> trace;

  int remaining_time() const { return horizon - stopping_time; }
};

struct AggregateRow {
  InputModel model = InputModel::kIII;
  Policy policy = Policy::kResolveSgd;
  int horizon = 0;
  double kappa = 0.0;
  int reps = 0;
  double mean_regret = 0.0;
  double std_regret = 0.0;
  double mean_remaining_time = 0.0;
  double mean_total_reward = 0.0;
  double mean_benchmark = 0.0;
  double mean_reward_per_step = 0.0;
  double mean_reg_per_step = 0.0;
  int infeasible = 0;
  int flagged = 0;
};

/// Mean remaining-resource fraction B_t,i / (d_i T) at sampled periods.
struct ResourceSeries {
  Policy policy = Policy::kResolveSgd;
  int horizon = 0;
  double kappa = 0.0;
  int resource = 0;
  std::vector<int> periods;
  std::vector<double> mean_fraction;
};

struct RegretReport {
  InputModel model = InputModel::kIII;
  BenchmarkKind benchmark = BenchmarkKind::kAvgDual;
  std::vector<RunRecord> runs;        // ordered by (kappa, T, policy, rep)
  std::vector<AggregateRow> aggregate;  // ordered by (kappa, T, policy)
  std::vector<ResourceSeries> resources;
};

/// Checks sum_t b_t x_t <= d T: remaining budgets must be >= 0 exactly and an
/// independent re-summation from the stream must agree to 1e-9 relative.
bool feasible(const RunTrace& trace, std::span<const Request> stream, const ProblemSpec& spec);

/// Runs every (kappa, T, policy, rep) cell on a worker pool and aggregates.
RegretReport regret_table(const ExperimentGrid& grid);

/// `requested` if > 0, else the hardware count; capped by BENCH_THREADS when set.
int worker_count(int requested);

}  // namespace oca

#endif  // OCA_EXPERIMENT_HPP_
