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

#include <benchmark/benchmark.h>

#include <random>

#include "oca/allocator.hpp"
#include "oca/dual_solver.hpp"
#include "oca/experiment.hpp"
#include "oca/inputs.hpp"

namespace {

oca::Instance make(oca::InputModel model, int horizon, double kappa = 0.0) {
  oca::InputModelSpec in;
  in.model = model;
  in.horizon = horizon;
  in.kappa = kappa;
  in.seed = 11;
  return oca::generate(in);
}

void BM_PrimalArgmaxLinearBox(benchmark::State& state) {
  const oca::Instance inst = make(oca::InputModel::kI, 64);
  const oca::Vector nu = oca::Vector::Constant(inst.spec.resources, 0.3);
  std::size_t k = 0;
  for (auto _ : state) {
    const oca::Request& r = inst.stream[k++ % inst.stream.size()];
    benchmark::DoNotOptimize(oca::primal_argmax(r.reward, r.cost, nu));
  }
}
BENCHMARK(BM_PrimalArgmaxLinearBox);

void BM_EvalDual(benchmark::State& state) {
  const int t = static_cast<int>(state.range(0));
  const oca::Instance inst = make(oca::InputModel::kI, t, 0.01);
  const oca::SaaDual p(inst.stream, inst.spec.avg_budget, inst.reg, oca::DualBox::from_spec(inst.spec));
  oca::DualPoint x = p.origin();
  x.lambda.setConstant(0.5);
  for (auto _ : state) benchmark::DoNotOptimize(p.eval(x));
  state.SetItemsProcessed(state.iterations() * t);
}
BENCHMARK(BM_EvalDual)->Arg(64)->Arg(1024);

void BM_SgdSolve(benchmark::State& state) {
  const auto k = state.range(0);
  const oca::Instance inst = make(oca::InputModel::kIII, 256);
  const oca::SaaDual p(inst.stream, inst.spec.avg_budget, inst.reg, oca::DualBox::from_spec(inst.spec));
  const auto sched = oca::SgdSchedule::constant(k, oca::sgd_radius(inst.spec), oca::sgd_lipschitz(inst.spec));
  std::mt19937_64 rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(oca::sgd_solve(p, p.origin(), sched, rng));
  state.SetItemsProcessed(state.iterations() * k);
}
BENCHMARK(BM_SgdSolve)->Arg(1000)->Arg(100000);

void BM_BatchSolve(benchmark::State& state) {
  const oca::Instance inst = make(oca::InputModel::kIII, static_cast<int>(state.range(0)));
  const oca::SaaDual p(inst.stream, inst.spec.avg_budget, inst.reg, oca::DualBox::from_spec(inst.spec));
  for (auto _ : state) benchmark::DoNotOptimize(oca::batch_solve(p, p.origin(), 1e-8));
}
BENCHMARK(BM_BatchSolve)->Arg(256)->Arg(4096);

void BM_RunResolveSgd(benchmark::State& state) {
  const oca::Instance inst = make(oca::InputModel::kIII, static_cast<int>(state.range(0)));
  oca::AllocatorConfig cfg;
  cfg.k_max = 10000;
  for (auto _ : state) benchmark::DoNotOptimize(oca::run(cfg, inst.spec, inst.reg, inst.stream, 5));
}
BENCHMARK(BM_RunResolveSgd)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
