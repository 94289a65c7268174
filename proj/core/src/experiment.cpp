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

#include "oca/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "oca/errors.hpp"

namespace oca {
namespace {

constexpr int kSeriesPoints = 200;

std::vector<int> sample_periods(int horizon) {
  std::vector<int> out;
  const int count = std::min(horizon, kSeriesPoints);
  for (int k = 1; k <= count; ++k) {
    const int t = static_cast<int>(std::llround(static_cast<double>(k) * horizon / count));
    if (out.empty() || out.back() != t) out.push_back(t);
  }
  return out;
}

// Flat state set for the grid search: consumption rows and rewards.
struct States {
  Eigen::Index m = 0;
  std::vector<double> cons;
  std::vector<double> value;

  std::size_t size() const { return value.size(); }
  const double* row(std::size_t i) const { return cons.data() + i * m; }
};

// Keeps, per exact consumption vector, the best reward.
States merge_duplicates(const States& s) {
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double* ra = s.row(a);
    const double* rb = s.row(b);
    for (Eigen::Index i = 0; i < s.m; ++i) {
      if (ra[i] != rb[i]) return ra[i] < rb[i];
    }
    return s.value[a] > s.value[b];
  });
  States out;
  out.m = s.m;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double* r = s.row(idx[k]);
    if (k > 0 && std::equal(r, r + s.m, s.row(idx[k - 1]))) continue;
    out.cons.insert(out.cons.end(), r, r + s.m);
    out.value.push_back(s.value[idx[k]]);
  }
  return out;
}

// Single resource, no regularizer: keep the staircase of states that no
// other state beats with less consumption.
States pareto_scalar(const States& s) {
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (s.cons[a] != s.cons[b]) return s.cons[a] < s.cons[b];
    return s.value[a] > s.value[b];
  });
  States out;
  out.m = 1;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k : idx) {
    if (s.value[k] > best) {
      best = s.value[k];
      out.cons.push_back(s.cons[k]);
      out.value.push_back(s.value[k]);
    }
  }
  return out;
}

}  // namespace

double dual_benchmark(std::span<const Request> history, const ProblemSpec& spec, const Regularizer& reg,
                      const DualPoint& dual) {
  if (history.empty()) throw std::invalid_argument("dual_benchmark: empty history");
  const SaaDual saa(history, spec.avg_budget, reg, DualBox::from_spec(spec));
  return static_cast<double>(history.size()) * saa.eval(dual);
}

DualPoint average_dual(const RunTrace& trace) {
  DualPoint p;
  p.lambda = trace.lambda.colwise().mean().transpose();
  if (trace.mu.cols() > 0) p.mu = trace.mu.colwise().mean().transpose();
  return p;
}

BatchResult optimal_dual(std::span<const Request> history, const ProblemSpec& spec, const Regularizer& reg,
                         double tol) {
  const SaaDual saa(history, spec.avg_budget, reg, DualBox::from_spec(spec));
  return batch_solve(saa, saa.origin(), tol);
}

double offline_bruteforce(std::span<const Request> requests, const ProblemSpec& spec, const Regularizer& reg,
                          double grid_step, std::size_t state_cap) {
  const int horizon = static_cast<int>(requests.size());
  if (horizon < 1 || horizon > 8) throw std::invalid_argument("offline_bruteforce: requires 1 <= T <= 8");
  if (!(grid_step > 0.0)) throw std::invalid_argument("offline_bruteforce: grid_step must be > 0");
  const Eigen::Index m = spec.resources;
  bool monotone = true;
  for (const Request& r : requests) {
    if (decision_dim(r.reward) != 1 || r.cost.cols() != 1) {
      throw std::invalid_argument("offline_bruteforce: requires n = 1");
    }
    if (r.cost.rows() != m) throw std::invalid_argument("offline_bruteforce: cost rows differ from m");
    if (r.cost.minCoeff() < 0.0) monotone = false;
  }
  const double bound = spec.action_bound;
  const auto cells = static_cast<long long>(std::floor(bound / grid_step + 1e-9));
  std::vector<double> grid;
  for (long long k = 0; k <= cells; ++k) grid.push_back(std::min(bound, static_cast<double>(k) * grid_step));
  if (grid.back() < bound) grid.push_back(bound);

  const Vector budget = spec.avg_budget * static_cast<double>(horizon);
  const Vector slack = (1e-9 * budget.cwiseAbs().array().max(1.0)).matrix();
  const bool scalar_pareto = m == 1 && reg.kind() == RegularizerKind::kNone && monotone;

  States states;
  states.m = m;
  states.cons.assign(m, 0.0);
  states.value.push_back(0.0);
  Vector x(1);
  for (const Request& r : requests) {
    std::vector<double> opt_value;
    std::vector<double> opt_cons;
    for (double g : grid) {
      x[0] = g;
      if (!in_region(r.reward, x)) continue;
      opt_value.push_back(reward(r.reward, x));
      for (Eigen::Index i = 0; i < m; ++i) opt_cons.push_back(r.cost(i, 0) * g);
    }
    States next;
    next.m = m;
    for (std::size_t s = 0; s < states.size(); ++s) {
      const double* base = states.row(s);
      for (std::size_t o = 0; o < opt_value.size(); ++o) {
        bool over = false;
        for (Eigen::Index i = 0; i < m; ++i) {
          if (monotone && base[i] + opt_cons[o * m + i] > budget[i] + slack[i]) over = true;
        }
        if (over) continue;
        for (Eigen::Index i = 0; i < m; ++i) next.cons.push_back(base[i] + opt_cons[o * m + i]);
        next.value.push_back(states.value[s] + opt_value[o]);
      }
      if (next.size() > state_cap) throw std::length_error("offline_bruteforce: state cap exceeded");
    }
    states = scalar_pareto ? pareto_scalar(next) : merge_duplicates(next);
    if (states.size() > state_cap) throw std::length_error("offline_bruteforce: state cap exceeded");
  }

  double best = -std::numeric_limits<double>::infinity();
  Vector avg(m);
  for (std::size_t s = 0; s < states.size(); ++s) {
    const double* c = states.row(s);
    bool ok = true;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (c[i] > budget[i] + slack[i]) ok = false;
      avg[i] = c[i] / horizon;
    }
    if (!ok) continue;
    double v = states.value[s];
    if (reg.kind() != RegularizerKind::kNone) {
      if (!reg.in_domain(avg)) continue;
      v += horizon * reg.value(avg);
    }
    best = std::max(best, v);
  }
  return best;
}

std::string_view to_string(BenchmarkKind k) { return k == BenchmarkKind::kAvgDual ? "avg-dual" : "opt-dual"; }

BenchmarkKind parse_benchmark(std::string_view name) {
  if (name == "avg-dual") return BenchmarkKind::kAvgDual;
  if (name == "opt-dual") return BenchmarkKind::kOptDual;
  throw std::invalid_argument("unknown benchmark '" + std::string(name) + "'");
}

std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_seed(std::uint64_t master, int horizon, int rep) {
  return mix64(mix64(mix64(master) ^ static_cast<std::uint64_t>(horizon)) ^ static_cast<std::uint64_t>(rep));
}

std::uint64_t algorithm_seed(std::uint64_t master, Policy policy, int horizon, int rep) {
  const auto tag = static_cast<std::uint64_t>(policy) + 0x51ED0000ULL;
  return mix64(stream_seed(master, horizon, rep) ^ mix64(tag));
}

void ExperimentGrid::validate() const {
  if (policies.empty()) throw std::invalid_argument("ExperimentGrid: no policies");
  if (horizons.empty()) throw std::invalid_argument("ExperimentGrid: no horizons");
  if (kappas.empty()) throw std::invalid_argument("ExperimentGrid: no kappa values");
  if (reps < 1) throw std::invalid_argument("ExperimentGrid: reps must be >= 1");
  for (int h : horizons) {
    if (h < 1) throw std::invalid_argument("ExperimentGrid: horizons must be >= 1");
  }
  alloc.validate();
}

bool feasible(const RunTrace& trace, std::span<const Request> stream, const ProblemSpec& spec) {
  if (trace.horizon != static_cast<int>(stream.size())) return false;
  if (trace.remaining.size() > 0 && trace.remaining.minCoeff() < 0.0) return false;
  Vector used = Vector::Zero(spec.resources);
  for (int t = 0; t < trace.horizon; ++t) used += stream[t].cost * trace.action.row(t).transpose();
  const Vector cap = spec.avg_budget * static_cast<double>(trace.horizon);
  for (Eigen::Index i = 0; i < used.size(); ++i) {
    if (used[i] > cap[i] + 1e-9 * std::max(1.0, std::abs(cap[i]))) return false;
  }
  return true;
}

int worker_count(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("BENCH_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

RegretReport regret_table(const ExperimentGrid& grid) {
  grid.validate();
  struct Cell {
    double kappa;
    int horizon;
    Policy policy;
    int rep;
  };
  std::vector<Cell> cells;
  for (double kappa : grid.kappas)
    for (int horizon : grid.horizons)
      for (Policy policy : grid.policies)
        for (int rep = 0; rep < grid.reps; ++rep) cells.push_back({kappa, horizon, policy, rep});

  std::vector<RunRecord> records(cells.size());
  std::vector<Matrix> series(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};

  auto work = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= cells.size()) return;
      try {
        const Cell& c = cells[k];
        InputModelSpec in = grid.input;
        in.horizon = c.horizon;
        in.kappa = c.kappa;
        in.seed = stream_seed(grid.master_seed, c.horizon, c.rep);
        const Instance inst = generate(in);
        AllocatorConfig cfg = grid.alloc;
        cfg.policy = c.policy;
        RunRecord& rec = records[k];
        rec.model = in.model;
        rec.policy = c.policy;
        rec.horizon = c.horizon;
        rec.kappa = c.kappa;
        rec.rep = c.rep;
        rec.stream_seed = in.seed;
        rec.algo_seed = algorithm_seed(grid.master_seed, c.policy, c.horizon, c.rep);
        RunTrace tr = run(cfg, inst.spec, inst.reg, inst.stream, rec.algo_seed);
        rec.reward_sum = tr.reward_sum;
        rec.reg_term = tr.reg_term;
        rec.total_reward = tr.total_reward;
        const DualPoint point = grid.benchmark == BenchmarkKind::kAvgDual
                                    ? average_dual(tr)
                                    : optimal_dual(inst.stream, inst.spec, inst.reg).point;
        rec.benchmark = dual_benchmark(inst.stream, inst.spec, inst.reg, point);
        rec.regret = rec.benchmark - rec.total_reward;
        rec.flagged = rec.regret < -1e-6;
        rec.stopping_time = tr.stopping_time;
        rec.feasible = feasible(tr, inst.stream, inst.spec);
        rec.depletion_time = tr.depletion_time;
        const Vector cap = inst.spec.initial_budget();
        rec.remaining_fraction = tr.remaining.row(c.horizon - 1).transpose().cwiseQuotient(cap);
        rec.wall_seconds = tr.wall_seconds;
        const Vector share = tr.total_consumption() / (c.horizon * inst.spec.avg_budget.sum());
        for (Eigen::Index i = 0; i < share.size(); ++i) {
          if (share[i] > 0.0) rec.allocation_entropy -= share[i] * std::log(share[i]);
        }
        const std::vector<int> periods = sample_periods(c.horizon);
        Matrix s(static_cast<Eigen::Index>(periods.size()), inst.spec.resources);
        for (std::size_t p = 0; p < periods.size(); ++p) {
          s.row(static_cast<Eigen::Index>(p)) = tr.remaining.row(periods[p] - 1).cwiseQuotient(cap.transpose());
        }
        series[k] = std::move(s);
        if (grid.keep_traces) rec.trace = std::move(tr);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };

  const int workers = std::min<int>(worker_count(grid.threads), static_cast<int>(cells.size()));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  RegretReport report;
  report.model = grid.input.model;
  report.benchmark = grid.benchmark;
  for (std::size_t start = 0; start < cells.size(); start += grid.reps) {
    const std::size_t end = start + grid.reps;
    AggregateRow row;
    const RunRecord& first = records[start];
    row.model = first.model;
    row.policy = first.policy;
    row.horizon = first.horizon;
    row.kappa = first.kappa;
    row.reps = grid.reps;
    for (std::size_t k = start; k < end; ++k) {
      const RunRecord& r = records[k];
      row.mean_regret += r.regret;
      row.mean_remaining_time += r.remaining_time();
      row.mean_total_reward += r.total_reward;
      row.mean_benchmark += r.benchmark;
      row.mean_reward_per_step += r.reward_sum / r.horizon;
      row.mean_reg_per_step += r.reg_term / r.horizon;
      if (!r.feasible) ++row.infeasible;
      if (r.flagged) ++row.flagged;
    }
    const double reps = grid.reps;
    row.mean_regret /= reps;
    row.mean_remaining_time /= reps;
    row.mean_total_reward /= reps;
    row.mean_benchmark /= reps;
    row.mean_reward_per_step /= reps;
    row.mean_reg_per_step /= reps;
    double ss = 0.0;
    for (std::size_t k = start; k < end; ++k) ss += (records[k].regret - row.mean_regret) * (records[k].regret - row.mean_regret);
    row.std_regret = grid.reps > 1 ? std::sqrt(ss / (reps - 1.0)) : 0.0;
    report.aggregate.push_back(row);

    // The most depleted resource on average stands in for a binding one.
    const Eigen::Index m = series[start].cols();
    Vector final_mean = Vector::Zero(m);
    Matrix mean_series = Matrix::Zero(series[start].rows(), m);
    for (std::size_t k = start; k < end; ++k) {
      final_mean += records[k].remaining_fraction;
      mean_series += series[k];
    }
    mean_series /= reps;
    Eigen::Index pick = 0;
    final_mean.minCoeff(&pick);
    ResourceSeries rs;
    rs.policy = row.policy;
    rs.horizon = row.horizon;
    rs.kappa = row.kappa;
    rs.resource = static_cast<int>(pick);
    rs.periods = sample_periods(row.horizon);
    rs.mean_fraction.assign(mean_series.col(pick).data(), mean_series.col(pick).data() + mean_series.rows());
    report.resources.push_back(std::move(rs));
  }
  report.runs = std::move(records);
  return report;
}

}  // namespace oca
