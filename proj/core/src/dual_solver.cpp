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

#include "oca/dual_solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

namespace oca {
namespace {

void clamp_in_place(DualPoint& p, const DualBox& box) {
  p.lambda = p.lambda.cwiseMax(0.0).cwiseMin(box.lambda_max);
  if (p.has_mu()) p.mu = p.mu.cwiseMax(-box.mu_max).cwiseMin(box.mu_max);
}

double inf_distance(const DualPoint& a, const DualPoint& b) {
  double d = (a.lambda - b.lambda).lpNorm<Eigen::Infinity>();
  if (a.has_mu()) d = std::max(d, (a.mu - b.mu).lpNorm<Eigen::Infinity>());
  return d;
}

// <g, q - p> for stacked g.
double directional(const Vector& g, const DualPoint& q, const DualPoint& p) {
  const Eigen::Index m = p.lambda.size();
  double s = g.head(m).dot(q.lambda - p.lambda);
  if (p.has_mu()) s += g.tail(m).dot(q.mu - p.mu);
  return s;
}

void take_step(const DualPoint& from, const Vector& g, double eta, const DualBox& box, DualPoint& to) {
  const Eigen::Index m = from.lambda.size();
  to.lambda = from.lambda - eta * g.head(m);
  if (from.has_mu()) {
    to.mu = from.mu - eta * g.tail(m);
  } else {
    to.mu.resize(0);
  }
  clamp_in_place(to, box);
}

}  // namespace

SaaDual::SaaDual(std::span<const Request> history, const Vector& budget, const Regularizer& reg, DualBox box)
    : history_(history), budget_(&budget), reg_(&reg), box_(box) {
  if (reg.dim() != budget.size()) {
    throw std::invalid_argument("SaaDual: regularizer dimension " + std::to_string(reg.dim()) +
                                " does not match " + std::to_string(budget.size()) + " resources");
  }
}

double SaaDual::eval(const DualPoint& p) const {
  if (history_.empty()) throw std::invalid_argument("SaaDual::eval: empty history");
  Vector nu, w, x;
  p.price_into(nu);
  double total = 0.0;
  for (const Request& r : history_) {
    w.noalias() = r.cost.transpose() * nu;
    total += conj_at_charge(r.reward, w, x);
  }
  double value = total / static_cast<double>(history_.size()) + budget_->dot(p.lambda);
  if (with_mu()) value += reg_->conj_at_neg(p.mu);
  return value;
}

Vector SaaDual::sample_gradient(int zeta, const DualPoint& p) const {
  if (zeta < 0 || zeta >= samples()) {
    throw std::out_of_range("SaaDual::sample_gradient: index " + std::to_string(zeta) + " outside [0, " +
                            std::to_string(samples()) + ")");
  }
  const Request& r = history_[zeta];
  const Vector nu = p.price();
  const Vector w = r.cost.transpose() * nu;
  Vector x;
  primal_argmax_into(r.reward, w, x);
  const Vector used = r.cost * x;
  const Eigen::Index m = resources();
  Vector g(with_mu() ? 2 * m : m);
  g.head(m) = *budget_ - used;
  if (with_mu()) g.tail(m) = reg_->argmax_a(p.mu) - used;
  return g;
}

double SaaDual::eval_with_gradient(const DualPoint& p, Vector& grad) const {
  if (history_.empty()) throw std::invalid_argument("SaaDual::eval: empty history");
  const Eigen::Index m = resources();
  Vector nu, w, x;
  Vector used = Vector::Zero(m);
  p.price_into(nu);
  double total = 0.0;
  for (const Request& r : history_) {
    w.noalias() = r.cost.transpose() * nu;
    total += conj_at_charge(r.reward, w, x);
    used.noalias() += r.cost * x;
  }
  const double inv_t = 1.0 / static_cast<double>(history_.size());
  used *= inv_t;
  grad.resize(with_mu() ? 2 * m : m);
  grad.head(m) = *budget_ - used;
  double value = total * inv_t + budget_->dot(p.lambda);
  if (with_mu()) {
    const Vector a = reg_->argmax_a(p.mu);
    grad.tail(m) = a - used;
    value += reg_->conj_at_neg(p.mu);
  }
  return value;
}

Vector SaaDual::gradient(const DualPoint& p) const {
  Vector g;
  eval_with_gradient(p, g);
  return g;
}

SgdSchedule SgdSchedule::constant(std::int64_t steps, double radius, double lipschitz) {
  SgdSchedule s;
  s.steps = steps;
  s.rule = StepRule::kConstant;
  s.eta = std::sqrt(2.0) * radius / (lipschitz * std::sqrt(static_cast<double>(steps)));
  s.averaging = Averaging::kUniform;
  s.validate();
  return s;
}

SgdSchedule SgdSchedule::harmonic(std::int64_t steps, double c) {
  SgdSchedule s;
  s.steps = steps;
  s.rule = StepRule::kHarmonic;
  s.eta = c;
  s.averaging = Averaging::kLastIterate;
  s.validate();
  return s;
}

void SgdSchedule::validate() const {
  if (steps < 1) throw std::invalid_argument("SgdSchedule: steps must be >= 1");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("SgdSchedule: step size must be > 0");
}

double sgd_radius(const ProblemSpec& spec) {
  return std::sqrt(spec.resources *
                   (2.0 * (spec.reward_bound + spec.reg_bound) / spec.budget_floor + spec.grad_bound));
}

double sgd_lipschitz(const ProblemSpec& spec) {
  const double m = spec.resources;
  const double n = spec.decision_dim;
  return std::sqrt(m * spec.budget_ceiling * spec.budget_ceiling +
                   2.0 * n * spec.cost_bound * spec.cost_bound * spec.action_bound * spec.action_bound +
                   n * spec.grad_bound * spec.grad_bound);
}

DualPoint sgd_solve(const SaaDual& p, const DualPoint& start, const SgdSchedule& sched, std::mt19937_64& rng) {
  sched.validate();
  if (p.samples() == 0) throw std::invalid_argument("sgd_solve: empty history");
  const auto history = p.history();
  const Vector& d = p.budget();
  const Regularizer& reg = p.regularizer();
  const DualBox& box = p.box();
  const bool with_mu = p.with_mu();
  const Eigen::Index m = p.resources();

  DualPoint cur = project_dual(start, box);
  if (with_mu && !cur.has_mu()) cur.mu = Vector::Zero(m);
  if (!with_mu) cur.mu.resize(0);
  DualPoint sum = DualPoint::zero(static_cast<int>(m), with_mu);
  Vector nu(m), w, x, used(m), a(m);
  std::uniform_int_distribution<int> pick(0, p.samples() - 1);

  if (!with_mu && m == 1 && history.front().cost.cols() == 1) {
    double lam = cur.lambda[0], acc = 0.0;
    const double d0 = d[0];
    Vector w1(1), x1(1);
    for (std::int64_t k = 1; k <= sched.steps; ++k) {
      const double eta = sched.step_size(k);
      const Request& r = history[pick(rng)];
      const double c = r.cost(0, 0);
      w1[0] = c * lam;
      primal_argmax_into(r.reward, w1, x1);
      lam -= eta * (d0 - c * x1[0]);
      lam = std::min(std::max(lam, 0.0), box.lambda_max);
      acc += lam;
    }
    if (sched.averaging == Averaging::kLastIterate) {
      cur.lambda[0] = lam;
      return cur;
    }
    sum.lambda[0] = acc * (1.0 / static_cast<double>(sched.steps));
    return sum;
  }

  for (std::int64_t k = 1; k <= sched.steps; ++k) {
    const double eta = sched.step_size(k);
    const Request& r = history[pick(rng)];
    cur.price_into(nu);
    w.noalias() = r.cost.transpose() * nu;
    primal_argmax_into(r.reward, w, x);
    used.noalias() = r.cost * x;
    if (with_mu) {
      reg.argmax_a_into(cur.mu, a);
      cur.mu -= eta * (a - used);
      cur.mu = cur.mu.cwiseMax(-box.mu_max).cwiseMin(box.mu_max);
    }
    cur.lambda -= eta * (d - used);
    cur.lambda = cur.lambda.cwiseMax(0.0).cwiseMin(box.lambda_max);
    if (sched.averaging == Averaging::kUniform) {
      sum.lambda += cur.lambda;
      if (with_mu) sum.mu += cur.mu;
    }
  }
  if (sched.averaging == Averaging::kLastIterate) return cur;
  const double inv_k = 1.0 / static_cast<double>(sched.steps);
  sum.lambda *= inv_k;
  if (with_mu) sum.mu *= inv_k;
  return sum;
}

BatchResult batch_solve(const SaaDual& p, const DualPoint& start, double tol, const BatchOptions& opts) {
  if (!(tol > 0.0)) throw std::invalid_argument("batch_solve: tol must be > 0");
  if (opts.max_iterations < 1) throw std::invalid_argument("batch_solve: max_iterations must be >= 1");
  BatchResult res;
  DualPoint cur = project_dual(start, p.box());
  if (p.with_mu() && !cur.has_mu()) cur.mu = Vector::Zero(p.resources());
  if (!p.with_mu()) cur.mu.resize(0);
  Vector g, g_trial;
  double f = p.eval_with_gradient(cur, g);
  DualPoint trial;
  std::deque<double> window;
  double window_sum = 0.0;

  while (res.iterations < opts.max_iterations) {
    double eta = opts.initial_step;
    bool accepted = false;
    double f_trial = f;
    while (eta >= opts.min_step) {
      take_step(cur, g, eta, p.box(), trial);
      const double slope = directional(g, trial, cur);
      if (slope == 0.0) break;  // projected step is stationary
      f_trial = p.eval_with_gradient(trial, g_trial);
      if (f_trial <= f + opts.armijo * slope) {
        accepted = true;
        break;
      }
      eta *= opts.shrink;
    }
    if (!accepted) {
      take_step(cur, g, opts.initial_step, p.box(), trial);
      res.grad_map_norm = inf_distance(trial, cur) / opts.initial_step;
      res.converged = res.grad_map_norm <= tol;
      break;
    }
    res.grad_map_norm = inf_distance(trial, cur) / eta;
    const double drop = f - f_trial;
    std::swap(cur, trial);
    std::swap(g, g_trial);
    f = f_trial;
    ++res.iterations;
    if (res.grad_map_norm <= tol) {
      res.converged = true;
      break;
    }
    if (opts.stall_window > 0) {
      window.push_back(drop);
      window_sum += drop;
      if (static_cast<int>(window.size()) > opts.stall_window) {
        window_sum -= window.front();
        window.pop_front();
      }
      if (static_cast<int>(window.size()) == opts.stall_window &&
          window_sum < opts.stall_decrease * std::max(1.0, std::abs(f))) {
        res.stalled = true;
        break;
      }
    }
  }
  res.point = cur;
  res.objective = f;
  return res;
}

}  // namespace oca
