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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "oca/allocator.hpp"
#include "oca/inputs.hpp"

namespace oca {
namespace {

Vector vec(std::initializer_list<double> v) {
  return Eigen::Map<const Vector>(v.begin(), static_cast<Eigen::Index>(v.size()));
}

const Policy kAllPolicies[] = {Policy::kResolveSgd, Policy::kResolveSgdStronglyConvex, Policy::kOgd,
                               Policy::kDualSaa,    Policy::kNonadaptive,              Policy::kExactResolve};

ProblemSpec quad_spec(int horizon) {
  ProblemSpec s;
  s.horizon = horizon;
  s.avg_budget = vec({0.5});
  s.reward_bound = 0.5625;
  s.budget_floor = 0.25;
  return s;
}

Request quad(double xi) { return Request{ScalarQuadratic{xi, 1.0}, Matrix::Ones(1, 1)}; }

AllocatorConfig config(Policy p) {
  AllocatorConfig c;
  c.policy = p;
  c.k_max = 2000;
  c.batch.max_iterations = 200;
  return c;
}

Instance input(InputModel model, int horizon, double kappa, std::uint64_t seed) {
  InputModelSpec in;
  in.model = model;
  in.horizon = horizon;
  in.kappa = kappa;
  in.seed = seed;
  return generate(in);
}

TEST(Names, RoundTrip) {
  for (Policy p : kAllPolicies) EXPECT_EQ(parse_policy(to_string(p)), p);
  for (auto r : {AccuracyRule::kInverseT, AccuracyRule::kInverseRemaining, AccuracyRule::kInverseT32,
                 AccuracyRule::kInverseRemaining32}) {
    EXPECT_EQ(parse_accuracy_rule(to_string(r)), r);
  }
  EXPECT_EQ(parse_k_rule("verbatim"), KRule::kVerbatim);
  EXPECT_EQ(parse_sc_step("conventional"), ScStep::kConventional);
  EXPECT_THROW(parse_policy("greedy"), std::invalid_argument);
}

TEST(AccuracySchedule, Rates) {
  AllocatorConfig c;
  c.accuracy_scale = 2.0;
  c.accuracy = AccuracyRule::kInverseT;
  EXPECT_DOUBLE_EQ(accuracy_at(c, 4, 10), 0.5);
  c.accuracy = AccuracyRule::kInverseRemaining;
  EXPECT_DOUBLE_EQ(accuracy_at(c, 4, 10), 2.0 / 6.0);
  c.accuracy = AccuracyRule::kInverseT32;
  EXPECT_DOUBLE_EQ(accuracy_at(c, 4, 10), 0.25);
  c.accuracy = AccuracyRule::kInverseRemaining32;
  EXPECT_DOUBLE_EQ(accuracy_at(c, 6, 10), 0.25);
  EXPECT_THROW(accuracy_at(c, 10, 10), std::out_of_range);
}

TEST(InnerSteps, VerbatimIsCubeAndBudgetedIsCapped) {
  AllocatorConfig c;
  c.k_rule = KRule::kVerbatim;
  EXPECT_EQ(sgd_steps_at(c, 1.0, 1.0, 7, 100), 343);
  c.k_rule = KRule::kBudgeted;
  c.accuracy = AccuracyRule::kInverseT;
  c.k_max = 1000000;
  // (R L / eps)^2 = (2 * 3 * 5)^2 = 900
  EXPECT_EQ(sgd_steps_at(c, 2.0, 3.0, 5, 100), 900);
  c.k_max = 100;
  EXPECT_EQ(sgd_steps_at(c, 2.0, 3.0, 5, 100), 100);
  c.k_max = 1000000;
  c.accuracy_scale = 1e6;
  EXPECT_EQ(sgd_steps_at(c, 1e-3, 1e-3, 1, 100), 1);
}

TEST(Run, VerbatimRuleRecordsCubicInnerSteps) {
  AllocatorConfig c = config(Policy::kResolveSgd);
  c.k_rule = KRule::kVerbatim;
  const std::vector<Request> stream{quad(0.5), quad(0.75), quad(0.5), quad(0.75), quad(0.5)};
  const RunTrace tr = run(c, quad_spec(5), Regularizer::none(1), stream, 3);
  EXPECT_EQ(tr.inner_steps, (std::vector<std::int64_t>{1, 8, 27, 64, 0}));
}

TEST(Step, ZeroDualGreedyFirstStep) {
  Allocator a(config(Policy::kResolveSgd), quad_spec(4), Regularizer::none(1), 1);
  const StepRecord r = a.step(quad(0.5));
  EXPECT_DOUBLE_EQ(r.action[0], 1.0);
  EXPECT_FALSE(r.forced_void);
  EXPECT_DOUBLE_EQ(a.state().remaining[0], 1.0);
  EXPECT_DOUBLE_EQ(a.state().avg_remaining[0], 1.0 / 3.0);
}

TEST(Step, ThrowsPastHorizon) {
  Allocator a(config(Policy::kOgd), quad_spec(1), Regularizer::none(1), 1);
  a.step(quad(0.5));
  EXPECT_THROW(a.step(quad(0.5)), std::logic_error);
}

// Hand replay: T = 3, d = 0.25, B_0 = 0.75, OGD with c = 1.
//  t=1: lambda = 0, x~ = 1 > 0.75 -> void. g = 0.25 - 1, lambda_1 = 0.75.
//  t=2: x~ = 2 (1.125 - 0.75) = 0.75 -> accepted, B_2 = 0.
//       g = 0.25 - 0.75, lambda_2 = 0.75 + 0.5 / 2 = 1.
//  t=3: x~ = 0.25 > 0 = B_2 -> void.
TEST(Step, HandReplayWithDepletion) {
  ProblemSpec s = quad_spec(3);
  s.avg_budget = vec({0.25});
  s.budget_floor = 0.1;
  const std::vector<Request> stream{quad(0.75), quad(1.125), quad(1.125)};
  const RunTrace tr = run(config(Policy::kOgd), s, Regularizer::none(1), stream, 0);
  EXPECT_EQ(tr.forced_void, (std::vector<char>{1, 0, 1}));
  EXPECT_EQ(tr.action(0, 0), 0.0);
  EXPECT_EQ(tr.action(1, 0), 0.75);
  EXPECT_EQ(tr.action(2, 0), 0.0);
  EXPECT_EQ(tr.remaining(0, 0), 0.75);
  EXPECT_EQ(tr.remaining(1, 0), 0.0);
  EXPECT_EQ(tr.lambda(1, 0), 0.75);
  EXPECT_EQ(tr.lambda(2, 0), 1.0);
  EXPECT_EQ(tr.avg_remaining(0, 0), 0.375);
  EXPECT_EQ(tr.avg_remaining(1, 0), 0.0);
  EXPECT_TRUE(std::isnan(tr.avg_remaining(2, 0)));
  EXPECT_EQ(tr.stopping_time, 1);
  EXPECT_EQ(tr.depletion_time, std::vector<int>{1});
  EXPECT_EQ(tr.reward_sum, 1.125 * 0.75 - 0.75 * 0.75 / 4);
}

TEST(Step, DepletedResourceRecomputesAverageFromUnchangedBudget) {
  ProblemSpec s = quad_spec(4);
  s.avg_budget = vec({0.2});
  s.budget_floor = 0.1;
  Allocator a(config(Policy::kResolveSgd), s, Regularizer::none(1), 5);
  const StepRecord r = a.step(quad(0.75));
  ASSERT_TRUE(r.forced_void);
  EXPECT_EQ(r.blocked, std::vector<int>{0});
  EXPECT_DOUBLE_EQ(a.state().remaining[0], 0.8);
  EXPECT_DOUBLE_EQ(a.state().avg_remaining[0], 0.8 / 3.0);
}

TEST(Run, SingleStepHorizon) {
  for (Policy p : kAllPolicies) {
    const RunTrace tr = run(config(p), quad_spec(1), Regularizer::none(1), std::vector<Request>{quad(0.2)}, 9);
    EXPECT_EQ(tr.horizon, 1);
    EXPECT_DOUBLE_EQ(tr.action(0, 0), 0.4) << to_string(p);
    EXPECT_EQ(tr.inner_steps[0], 0);
  }
}

TEST(Run, DeterministicGivenSeed) {
  const Instance inst = input(InputModel::kI, 60, 0.01, 4);
  for (Policy p : kAllPolicies) {
    const RunTrace a = run(config(p), inst.spec, inst.reg, inst.stream, 77);
    const RunTrace b = run(config(p), inst.spec, inst.reg, inst.stream, 77);
    std::ostringstream sa, sb;
    write_trace_csv(sa, a);
    write_trace_csv(sb, b);
    EXPECT_EQ(sa.str(), sb.str()) << to_string(p);
    EXPECT_EQ(a.total_reward, b.total_reward);
  }
}

TEST(Run, RejectsWrongStreamLength) {
  EXPECT_THROW(run(config(Policy::kOgd), quad_spec(3), Regularizer::none(1), std::vector<Request>{quad(0.5)}, 0),
               std::invalid_argument);
}

TEST(Run, FeasibleAndBudgetIdentityForAllPoliciesAndModels) {
  for (InputModel model : {InputModel::kI, InputModel::kII, InputModel::kIII, InputModel::kIV, InputModel::kOnlineLp,
                           InputModel::kWelfare}) {
    const double kappa = model == InputModel::kIII || model == InputModel::kOnlineLp ? 0.0 : 0.01;
    const Instance inst = input(model, 80, kappa, 21);
    for (Policy p : kAllPolicies) {
      const RunTrace tr = run(config(p), inst.spec, inst.reg, inst.stream, 3);
      const Vector total = tr.total_consumption();
      const Vector cap = inst.spec.initial_budget();
      for (Eigen::Index i = 0; i < cap.size(); ++i) {
        EXPECT_LE(total[i], cap[i] * (1 + 1e-12)) << to_string(model) << " " << to_string(p);
      }
      EXPECT_GE(tr.remaining.minCoeff(), 0.0);
      Vector b = cap;
      for (int t = 0; t < tr.horizon; ++t) {
        b -= tr.consumption.row(t).transpose();
        EXPECT_LE((b - tr.remaining.row(t).transpose()).lpNorm<Eigen::Infinity>(), 1e-9);
        if (t + 1 < tr.horizon) {
          const Vector lhs = tr.avg_remaining.row(t).transpose() * static_cast<double>(tr.horizon - t - 1);
          EXPECT_LE((lhs - tr.remaining.row(t).transpose()).lpNorm<Eigen::Infinity>(), 1e-9);
        }
        // every dual used lies in the box
        const DualBox box = DualBox::from_spec(inst.spec);
        EXPECT_GE(tr.lambda.row(t).minCoeff(), 0.0);
        EXPECT_LE(tr.lambda.row(t).maxCoeff(), box.lambda_max);
        if (tr.mu.cols() > 0) EXPECT_LE(tr.mu.row(t).cwiseAbs().maxCoeff(), box.mu_max);
      }
      EXPECT_NEAR(tr.total_reward, tr.reward_sum + tr.reg_term, 1e-12);
    }
  }
}

// Replays the allocator by hand with the same RNG and the documented
// per-period solver, and expects identical duals.
void replay_sgd(Policy p) {
  const Instance inst = input(InputModel::kII, 25, 0.0, 8);
  AllocatorConfig cfg = config(p);
  const RunTrace tr = run(cfg, inst.spec, inst.reg, inst.stream, 41);
  std::mt19937_64 rng(41);
  const DualBox box = DualBox::from_spec(inst.spec);
  const double R = sgd_radius(inst.spec), L = sgd_lipschitz(inst.spec);
  DualPoint dual = DualPoint::zero(inst.spec.resources, false);
  Vector budget = inst.spec.initial_budget();
  for (int t = 1; t < inst.spec.horizon; ++t) {
    ASSERT_EQ(dual.lambda, tr.lambda.row(t - 1).transpose()) << "t=" << t;
    budget -= tr.consumption.row(t - 1).transpose();
    const Vector d = p == Policy::kNonadaptive ? inst.spec.avg_budget
                                                : Vector(budget / static_cast<double>(inst.spec.horizon - t));
    const std::span<const Request> seen(inst.stream.data(), t);
    const SaaDual saa(seen, d, inst.reg, box);
    dual = sgd_solve(saa, dual, SgdSchedule::constant(sgd_steps_at(cfg, R, L, t, inst.spec.horizon), R, L), rng);
  }
  EXPECT_EQ(dual.lambda, tr.lambda.row(inst.spec.horizon - 1).transpose());
}

TEST(Run, ResolveSgdReplaysWithAdaptiveBudget) { replay_sgd(Policy::kResolveSgd); }
TEST(Run, NonadaptiveReplaysWithFixedBudget) { replay_sgd(Policy::kNonadaptive); }

TEST(Run, ExactResolveDualIsBatchSolution) {
  const Instance inst = input(InputModel::kIII, 40, 0.0, 2);
  AllocatorConfig cfg = config(Policy::kExactResolve);
  cfg.accuracy = AccuracyRule::kInverseT32;
  cfg.accuracy_scale = 1e-6;
  const RunTrace tr = run(cfg, inst.spec, inst.reg, inst.stream, 0);
  const DualBox box = DualBox::from_spec(inst.spec);
  for (int t = 1; t < inst.spec.horizon; ++t) {
    const Vector d = tr.avg_remaining.row(t - 1).transpose();
    const std::span<const Request> seen(inst.stream.data(), t);
    const SaaDual saa(seen, d, inst.reg, box);
    const BatchResult ref = batch_solve(saa, saa.origin(), 1e-12);
    DualPoint used = saa.origin();
    used.lambda = tr.lambda.row(t).transpose();
    EXPECT_LE(saa.eval(used) - ref.objective, 1e-8) << "t=" << t;
  }
}

TEST(Run, OgdUsesFreshSampleAndFixedBudget) {
  const Instance inst = input(InputModel::kIII, 30, 0.0, 6);
  const RunTrace tr = run(config(Policy::kOgd), inst.spec, inst.reg, inst.stream, 0);
  const DualBox box = DualBox::from_spec(inst.spec);
  double lam = 0.0;
  for (int t = 1; t < inst.spec.horizon; ++t) {
    EXPECT_DOUBLE_EQ(tr.lambda(t - 1, 0), lam);
    // gradient uses x~ even when the action was voided
    const double xi = std::get<ScalarQuadratic>(inst.stream[t - 1].reward).xi;
    const double proposal = std::clamp(2.0 * (xi - lam), 0.0, 1.0);
    lam = std::clamp(lam - (0.5 - proposal) / t, 0.0, box.lambda_max);
  }
  EXPECT_DOUBLE_EQ(tr.lambda(inst.spec.horizon - 1, 0), lam);
}

TEST(Run, StronglyConvexUsesLinearStepCount) {
  const Instance inst = input(InputModel::kIII, 12, 0.0, 2);
  AllocatorConfig cfg = config(Policy::kResolveSgdStronglyConvex);
  const RunTrace tr = run(cfg, inst.spec, inst.reg, inst.stream, 0);
  for (int t = 1; t < 12; ++t) EXPECT_EQ(tr.inner_steps[t - 1], t);
  cfg.sc_step = ScStep::kConventional;
  EXPECT_NO_THROW(run(cfg, inst.spec, inst.reg, inst.stream, 0));
}

TEST(StoppingStats, Summaries) {
  RunTrace a;
  a.horizon = 100;
  a.stopping_time = 100;
  a.depletion_time = {100, 100};
  std::vector<RunTrace> never{a, a, a};
  const StoppingStats s0 = stopping_stats(never);
  EXPECT_EQ(s0.mean_remaining, 0.0);
  RunTrace b = a;
  b.stopping_time = 92;
  b.depletion_time = {92, 100};
  const StoppingStats s1 = stopping_stats(std::vector<RunTrace>{b});
  EXPECT_EQ(s1.mean_remaining, 8.0);
  EXPECT_EQ(s1.p50, 8.0);
  const StoppingStats s2 = stopping_stats(std::vector<RunTrace>{a, b});
  EXPECT_EQ(s2.mean_remaining, 4.0);
  EXPECT_NEAR(s2.std_remaining, std::sqrt(32.0), 1e-12);
  EXPECT_EQ(s2.mean_depletion_time, (std::vector<double>{96.0, 100.0}));
  EXPECT_THROW(stopping_stats(std::vector<RunTrace>{}), std::invalid_argument);
}

TEST(BindingDiagnostics, PartitionsResources) {
  const Instance inst = input(InputModel::kII, 300, 0.0, 12);
  const RunTrace tr = run(config(Policy::kResolveSgd), inst.spec, inst.reg, inst.stream, 1);
  const BindingDiagnostics bd = binding_diagnostics(tr, 0.25 * inst.spec.budget_floor);
  std::vector<int> all = bd.binding;
  all.insert(all.end(), bd.non_binding.begin(), bd.non_binding.end());
  std::sort(all.begin(), all.end());
  std::vector<int> expect(inst.spec.resources);
  std::iota(expect.begin(), expect.end(), 0);
  EXPECT_EQ(all, expect);
  for (int i : bd.binding) {
    EXPECT_LT(tr.remaining(299, i) / (inst.spec.avg_budget[i] * 300), 0.05);
  }
  EXPECT_EQ(bd.trajectory.rows(), 299);
  EXPECT_LE(bd.stopping_time, 300);
}

TEST(BindingDiagnostics, ExitTimeFromTrajectory) {
  RunTrace tr;
  tr.horizon = 4;
  tr.budget = vec({1.0, 1.0});
  tr.remaining.resize(4, 2);
  tr.remaining << 3.0, 3.5, 2.0, 3.0, 1.0, 2.4, 0.0, 1.6;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  tr.avg_remaining.resize(4, 2);
  tr.avg_remaining << 1.0, 3.5 / 3, 1.0, 1.5, 1.0, 2.4, nan, nan;
  const BindingDiagnostics bd = binding_diagnostics(tr, 0.25);
  EXPECT_EQ(bd.binding, std::vector<int>{0});
  EXPECT_EQ(bd.non_binding, std::vector<int>{1});
  EXPECT_EQ(bd.exit_time, (std::vector<int>{4, 4}));
  tr.avg_remaining(1, 0) = 0.7;
  EXPECT_EQ(binding_diagnostics(tr, 0.25).exit_time[0], 2);
  tr.avg_remaining(0, 1) = 0.7;
  EXPECT_EQ(binding_diagnostics(tr, 0.25).stopping_time, 1);
}

TEST(TraceCsv, RoundTripReproducesTotals) {
  const Instance inst = input(InputModel::kI, 40, 0.02, 5);
  const RunTrace tr = run(config(Policy::kResolveSgd), inst.spec, inst.reg, inst.stream, 2);
  std::stringstream ss;
  write_trace_csv(ss, tr);
  const RunTrace back = read_trace_csv(ss, inst.spec.avg_budget);
  EXPECT_EQ(back.horizon, tr.horizon);
  EXPECT_EQ(back.lambda, tr.lambda);
  EXPECT_EQ(back.mu, tr.mu);
  EXPECT_EQ(back.action, tr.action);
  EXPECT_EQ(back.consumption, tr.consumption);
  EXPECT_EQ(back.forced_void, tr.forced_void);
  EXPECT_EQ(back.inner_steps, tr.inner_steps);
  EXPECT_EQ(back.stopping_time, tr.stopping_time);
  EXPECT_NEAR(back.reward_sum + regularizer_term(back, inst.reg), tr.total_reward, 1e-9);
}

TEST(TraceCsv, RejectsMalformedInput) {
  std::stringstream bad("t,lambda_1,reward\n1,0,0\n");
  EXPECT_THROW(read_trace_csv(bad, vec({0.5})), std::runtime_error);
}

}  // namespace
}  // namespace oca
