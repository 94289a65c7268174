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
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "oca/emit.hpp"
#include "oca/experiment.hpp"
#include "oca/stream_io.hpp"
#include "oca/svg_plot.hpp"

namespace oca {
namespace {

Request quad(double xi) { return Request{ScalarQuadratic{xi, 1.0}, Matrix::Ones(1, 1)}; }

ProblemSpec quad_spec(int horizon) {
  ProblemSpec s;
  s.horizon = horizon;
  s.avg_budget = Vector::Constant(1, 0.5);
  s.reward_bound = 0.5625;
  s.budget_floor = 0.25;
  return s;
}

DualPoint lam(double v) { return DualPoint{Vector::Constant(1, v), Vector()}; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentGrid small_grid() {
  ExperimentGrid g;
  g.input.model = InputModel::kIII;
  g.policies = {Policy::kResolveSgd, Policy::kOgd, Policy::kNonadaptive};
  g.horizons = {16, 32};
  g.reps = 3;
  g.master_seed = 5;
  g.alloc.k_max = 500;
  g.threads = 2;
  return g;
}

TEST(DualBenchmark, SingleRequestExample) {
  const std::vector<Request> h{quad(0.75)};
  // (0.75 - 0.375)^2 + 0.5 * 0.375
  EXPECT_DOUBLE_EQ(dual_benchmark(h, quad_spec(1), Regularizer::none(1), lam(0.375)), 0.328125);
  EXPECT_THROW(dual_benchmark(std::vector<Request>{}, quad_spec(1), Regularizer::none(1), lam(0.0)),
               std::invalid_argument);
}

TEST(DualBenchmark, OrderInvariantAndLinearInCopies) {
  const std::vector<Request> a{quad(0.5), quad(0.75), quad(0.75), quad(0.5)};
  const std::vector<Request> b{quad(0.75), quad(0.5), quad(0.5), quad(0.75)};
  const std::vector<Request> c{quad(0.5), quad(0.75)};
  for (double l : {0.0, 0.2, 0.3, 0.6}) {
    const double va = dual_benchmark(a, quad_spec(4), Regularizer::none(1), lam(l));
    EXPECT_DOUBLE_EQ(va, dual_benchmark(b, quad_spec(4), Regularizer::none(1), lam(l)));
    EXPECT_NEAR(va, 2.0 * dual_benchmark(c, quad_spec(2), Regularizer::none(1), lam(l)), 1e-14);
  }
}

TEST(OptimalDual, InputThreeStrongDuality) {
  // sample mean xi_bar in [1/2, 3/4]: lambda* = xi_bar - 1/4
  const std::vector<Request> h{quad(0.5), quad(0.75), quad(0.75), quad(0.75)};
  const BatchResult r = optimal_dual(h, quad_spec(4), Regularizer::none(1), 1e-12);
  EXPECT_NEAR(r.point.lambda[0], 0.6875 - 0.25, 1e-9);
  // every x = 2 (xi - lambda*) fits exactly into the budget, so primal = dual
  double primal = 0.0;
  for (double xi : {0.5, 0.75, 0.75, 0.75}) {
    const double x = 2.0 * (xi - r.point.lambda[0]);
    primal += xi * x - 0.25 * x * x;
  }
  EXPECT_NEAR(dual_benchmark(h, quad_spec(4), Regularizer::none(1), r.point), primal, 1e-9);
}

TEST(AverageDual, ColumnMeans) {
  RunTrace tr;
  tr.lambda.resize(2, 2);
  tr.lambda << 1.0, 2.0, 3.0, 6.0;
  tr.mu.resize(2, 0);
  const DualPoint p = average_dual(tr);
  EXPECT_EQ(p.lambda, (Vector(2) << 2.0, 4.0).finished());
  EXPECT_FALSE(p.has_mu());
}

TEST(OfflineBruteforce, Examples) {
  const std::vector<Request> one{quad(0.75)};
  EXPECT_NEAR(offline_bruteforce(one, quad_spec(1), Regularizer::none(1), 1e-3), 0.3125, 1e-12);
  ProblemSpec lp = quad_spec(2);
  const std::vector<Request> neg{Request{LinearBox{Vector::Constant(1, -1.0), 1.0}, Matrix::Ones(1, 1)},
                                 Request{LinearBox{Vector::Constant(1, -0.5), 1.0}, Matrix::Ones(1, 1)}};
  EXPECT_EQ(offline_bruteforce(neg, lp, Regularizer::none(1), 1e-3), 0.0);
}

// Naive enumeration over the grid as an independent check for tiny cases.
double enumerate(const std::vector<Request>& reqs, const ProblemSpec& spec, const Regularizer& reg, double h) {
  const int steps = static_cast<int>(std::round(spec.action_bound / h));
  const int horizon = static_cast<int>(reqs.size());
  std::vector<int> idx(horizon, 0);
  double best = -std::numeric_limits<double>::infinity();
  const Vector cap = spec.initial_budget();
  for (;;) {
    Vector used = Vector::Zero(spec.resources);
    double f = 0.0;
    for (int t = 0; t < horizon; ++t) {
      const Vector x = Vector::Constant(1, idx[t] * h);
      used += reqs[t].cost * x;
      f += reward(reqs[t].reward, x);
    }
    if ((used.array() <= cap.array() + 1e-12).all()) {
      if (!reg.pins_mu()) f += horizon * reg.value(used / horizon);
      best = std::max(best, f);
    }
    int k = 0;
    while (k < horizon && ++idx[k] > steps) idx[k++] = 0;
    if (k == horizon) break;
  }
  return best;
}

TEST(OfflineBruteforce, MatchesNaiveEnumerationAndWeakDuality) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int horizon = 1 + trial % 3;
    ProblemSpec s;
    s.horizon = horizon;
    s.resources = 2;
    s.avg_budget = Vector::Constant(2, 0.3);
    s.cost_bound = std::sqrt(2.0);
    s.reward_bound = 1.0;
    s.budget_floor = 0.1;
    std::vector<Request> reqs;
    for (int t = 0; t < horizon; ++t) {
      Matrix b(2, 1);
      b << u(rng), u(rng);
      reqs.push_back(Request{LinearBox{Vector::Constant(1, u(rng) - 0.2), 1.0}, b});
    }
    const Regularizer none = Regularizer::none(2);
    const double h = 0.05;
    const double dp = offline_bruteforce(reqs, s, none, h);
    EXPECT_NEAR(dp, enumerate(reqs, s, none, h), 1e-12);
    const BatchResult opt = optimal_dual(reqs, s, none, 1e-10);
    EXPECT_LE(dp, dual_benchmark(reqs, s, none, opt.point) + 1e-9);
    const Regularizer l2 = Regularizer::l2(2, 0.3, s.consumption_radius());
    EXPECT_NEAR(offline_bruteforce(reqs, s, l2, h), enumerate(reqs, s, l2, h), 1e-12);
  }
}

TEST(OfflineBruteforce, Guards) {
  std::vector<Request> nine(9, quad(0.5));
  EXPECT_THROW(offline_bruteforce(nine, quad_spec(9), Regularizer::none(1), 0.1), std::invalid_argument);
  EXPECT_THROW(offline_bruteforce(std::vector<Request>{quad(0.5)}, quad_spec(1), Regularizer::none(1), 0.0),
               std::invalid_argument);
  ProblemSpec s = quad_spec(1);
  s.decision_dim = 2;
  const std::vector<Request> wide{Request{LinearBox{Vector::Ones(2), 1.0}, Matrix::Ones(1, 2)}};
  EXPECT_THROW(offline_bruteforce(wide, s, Regularizer::none(1), 0.1), std::invalid_argument);
}

TEST(Seeds, SplitMixReference) {
  // first outputs of SplitMix64 seeded with 0 and 1
  EXPECT_EQ(mix64(0), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(mix64(0x9E3779B97F4A7C15ULL), 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(stream_seed(3, 64, 2), mix64(mix64(mix64(3) ^ 64) ^ 2));
  EXPECT_NE(stream_seed(3, 64, 2), stream_seed(3, 64, 3));
  EXPECT_NE(algorithm_seed(3, Policy::kOgd, 64, 2), algorithm_seed(3, Policy::kResolveSgd, 64, 2));
}

TEST(Feasible, DetectsOverspend) {
  const std::vector<Request> h{quad(0.75), quad(0.75)};
  const RunTrace tr = run(AllocatorConfig{}, quad_spec(2), Regularizer::none(1), h, 0);
  EXPECT_TRUE(feasible(tr, h, quad_spec(2)));
  RunTrace bad = tr;
  bad.action.setConstant(0.6);
  EXPECT_FALSE(feasible(bad, h, quad_spec(2)));
  bad = tr;
  bad.remaining(1, 0) = -1e-300;
  EXPECT_FALSE(feasible(bad, h, quad_spec(2)));
}

TEST(RegretTable, SingleRepMatchesDirectRun) {
  ExperimentGrid g = small_grid();
  g.policies = {Policy::kResolveSgd};
  g.horizons = {20};
  g.reps = 1;
  g.benchmark = BenchmarkKind::kOptDual;
  const RegretReport rep = regret_table(g);
  ASSERT_EQ(rep.runs.size(), 1u);
  InputModelSpec in = g.input;
  in.horizon = 20;
  in.seed = stream_seed(g.master_seed, 20, 0);
  const Instance inst = generate(in);
  AllocatorConfig cfg = g.alloc;
  const RunTrace tr = run(cfg, inst.spec, inst.reg, inst.stream, algorithm_seed(g.master_seed, cfg.policy, 20, 0));
  const RunRecord& r = rep.runs[0];
  EXPECT_EQ(r.total_reward, tr.total_reward);
  EXPECT_EQ(r.stopping_time, tr.stopping_time);
  const double bench = dual_benchmark(inst.stream, inst.spec, inst.reg,
                                      optimal_dual(inst.stream, inst.spec, inst.reg).point);
  EXPECT_EQ(r.benchmark, bench);
  EXPECT_EQ(r.regret, bench - tr.total_reward);
  EXPECT_TRUE(r.feasible);
  ASSERT_EQ(rep.aggregate.size(), 1u);
  EXPECT_EQ(rep.aggregate[0].mean_regret, r.regret);
  EXPECT_EQ(rep.aggregate[0].std_regret, 0.0);
}

TEST(RegretTable, AggregateShapeAndStatistics) {
  const ExperimentGrid g = small_grid();
  const RegretReport rep = regret_table(g);
  EXPECT_EQ(rep.runs.size(), 3u * 2u * 3u);
  ASSERT_EQ(rep.aggregate.size(), 3u * 2u);
  for (const AggregateRow& a : rep.aggregate) {
    std::vector<double> regrets;
    for (const RunRecord& r : rep.runs) {
      if (r.policy == a.policy && r.horizon == a.horizon) regrets.push_back(r.regret);
    }
    ASSERT_EQ(regrets.size(), 3u);
    double mean = 0.0;
    for (double v : regrets) mean += v / 3.0;
    double var = 0.0;
    for (double v : regrets) var += (v - mean) * (v - mean) / 2.0;
    EXPECT_NEAR(a.mean_regret, mean, 1e-12);
    EXPECT_NEAR(a.std_regret, std::sqrt(var), 1e-12);
    EXPECT_EQ(a.reps, 3);
    EXPECT_EQ(a.infeasible, 0);
  }
  // policies in one (T, rep) cell share the stream
  for (const RunRecord& r : rep.runs) EXPECT_EQ(r.stream_seed, stream_seed(5, r.horizon, r.rep));
}

TEST(RegretTable, ThreadCountDoesNotChangeOutput) {
  ExperimentGrid g = small_grid();
  g.threads = 1;
  const RegretReport a = regret_table(g);
  g.threads = 4;
  const RegretReport b = regret_table(g);
  std::ostringstream sa, sb, ra, rb;
  write_aggregate_csv(sa, a);
  write_aggregate_csv(sb, b);
  write_runs_csv(ra, a);
  write_runs_csv(rb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(ra.str(), rb.str());
}

TEST(RegretTable, RejectsEmptyGrid) {
  ExperimentGrid g = small_grid();
  g.policies.clear();
  EXPECT_THROW(regret_table(g), std::invalid_argument);
  g = small_grid();
  g.reps = 0;
  EXPECT_THROW(regret_table(g), std::invalid_argument);
}

TEST(WorkerCount, EnvironmentCap) {
  ::setenv("BENCH_THREADS", "2", 1);
  EXPECT_EQ(worker_count(8), 2);
  EXPECT_EQ(worker_count(1), 1);
  ::unsetenv("BENCH_THREADS");
  EXPECT_EQ(worker_count(3), 3);
  EXPECT_GE(worker_count(0), 1);
}

TEST(StreamCsv, RoundTripAllFamilies) {
  for (InputModel model : {InputModel::kI, InputModel::kIII, InputModel::kIV, InputModel::kWelfare}) {
    InputModelSpec in;
    in.model = model;
    in.horizon = 30;
    in.seed = 4;
    const Instance inst = generate(in);
    std::stringstream ss;
    write_stream_csv(ss, inst.stream);
    const std::vector<Request> back = read_stream_csv(ss);
    ASSERT_EQ(back.size(), inst.stream.size());
    for (std::size_t t = 0; t < back.size(); ++t) {
      EXPECT_EQ(back[t].cost, inst.stream[t].cost);
      EXPECT_EQ(family_name(back[t].reward), family_name(inst.stream[t].reward));
      const Vector nu = Vector::Constant(inst.spec.resources, 0.3);
      EXPECT_EQ(conj(back[t].reward, back[t].cost, nu), conj(inst.stream[t].reward, inst.stream[t].cost, nu));
    }
  }
}

TEST(StreamCsv, MalformedInputNamesTheLine) {
  const char* cases[] = {
      "t,record,key,arg,values\n1,reward,linear-box,1,abc\n1,cost,1,1\n",
      "t,record,key,arg,values\n1,reward,nope,1,0.5\n1,cost,1,1\n",
      "t,record,key,arg,values\n1,cost,1,1\n",
      "t,record,key,arg,values\n1,reward,linear-box,1,0.5\n",
  };
  for (const char* text : cases) {
    std::stringstream ss(text);
    try {
      read_stream_csv(ss);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const std::runtime_error& e) {
      EXPECT_NE(std::string(e.what()).find("line"), std::string::npos) << e.what();
    }
  }
}

TEST(Emit, WritesAllFilesDeterministically) {
  const auto root = std::filesystem::temp_directory_path() / "oca_emit_test";
  std::filesystem::remove_all(root);
  const RegretReport rep = regret_table(small_grid());
  const auto a = emit(rep, (root / "a").string());
  const auto b = emit(rep, (root / "b").string(), EmitFormat::kCsvAndSvg);
  ASSERT_EQ(a.size(), 8u);
  for (const char* name : {"runs.csv", "aggregate.csv", "regret_vs_T.csv", "remaining_resource.csv",
                           "tradeoff.csv", "regret_vs_T.svg", "remaining_resource.svg", "tradeoff.svg"}) {
    EXPECT_EQ(slurp(root / "a" / name), slurp(root / "b" / name)) << name;
    EXPECT_FALSE(slurp(root / "a" / name).empty()) << name;
  }
  const auto c = emit(rep, (root / "c").string(), EmitFormat::kCsv);
  EXPECT_EQ(c.size(), 5u);
  std::stringstream agg(slurp(root / "a" / "aggregate.csv"));
  std::string line;
  int lines = 0;
  while (std::getline(agg, line)) ++lines;
  EXPECT_EQ(lines, 1 + 6);
  std::filesystem::remove_all(root);
}

TEST(Emit, UnwritableDirectoryThrows) {
  const RegretReport rep = regret_table(small_grid());
  EXPECT_THROW(emit(rep, "/proc/oca_no_such_dir/x"), std::runtime_error);
}

TEST(Svg, RendersSeriesAndSkipsNonFinite) {
  const std::vector<PlotSeries> s{{"a<b", {1, 2, 3}, {1, std::nan(""), 4}}, {"c", {1, 2}, {2, 3}}};
  const std::string svg = render_svg({"T & regret", "x", "y"}, s);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("a&lt;b"), std::string::npos);
  EXPECT_NE(svg.find("T &amp; regret"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_NO_THROW(render_svg({"empty", "x", "y"}, std::vector<PlotSeries>{}));
}

}  // namespace
}  // namespace oca
