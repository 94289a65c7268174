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

#include "oca/problem.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace oca {

void ProblemSpec::validate() const {
  if (horizon < 1) throw std::invalid_argument("ProblemSpec: horizon must be >= 1");
  if (resources < 1) throw std::invalid_argument("ProblemSpec: resources must be >= 1");
  if (decision_dim < 1) throw std::invalid_argument("ProblemSpec: decision_dim must be >= 1");
  if (avg_budget.size() != resources) {
    throw std::invalid_argument("ProblemSpec: avg_budget has " + std::to_string(avg_budget.size()) +
                                " entries, expected " + std::to_string(resources));
  }
  if (!(action_bound > 0.0)) throw std::invalid_argument("ProblemSpec: action_bound must be > 0");
  if (!(reward_bound > 0.0)) throw std::invalid_argument("ProblemSpec: reward_bound must be > 0");
  if (!(cost_bound > 0.0)) throw std::invalid_argument("ProblemSpec: cost_bound must be > 0");
  if (!(reg_bound >= 0.0)) throw std::invalid_argument("ProblemSpec: reg_bound must be >= 0");
  if (!(grad_bound >= 0.0) || !std::isfinite(grad_bound)) {
    throw std::invalid_argument("ProblemSpec: grad_bound must be finite and >= 0");
  }
  if (!(budget_floor > 0.0)) throw std::invalid_argument("ProblemSpec: budget_floor must be > 0");
  for (Eigen::Index i = 0; i < avg_budget.size(); ++i) {
    const double di = avg_budget[i];
    if (!(di > budget_floor && di < budget_ceiling)) {
      throw std::invalid_argument("ProblemSpec: avg_budget[" + std::to_string(i) + "] = " +
                                  std::to_string(di) + " outside (budget_floor, budget_ceiling)");
    }
  }
}

double ProblemSpec::consumption_radius() const {
  return std::sqrt(static_cast<double>(decision_dim)) * action_bound * cost_bound;
}

DualPoint DualPoint::zero(int resources, bool with_mu) {
  DualPoint p;
  p.lambda = Vector::Zero(resources);
  p.mu = with_mu ? Vector::Zero(resources) : Vector();
  return p;
}

Vector DualPoint::price() const {
  Vector out;
  price_into(out);
  return out;
}

void DualPoint::price_into(Vector& out) const {
  if (has_mu()) {
    out = lambda + mu;
  } else {
    out = lambda;
  }
}

Vector DualPoint::stacked() const {
  Vector out(dim());
  out.head(lambda.size()) = lambda;
  if (has_mu()) out.tail(mu.size()) = mu;
  return out;
}

DualBox DualBox::from_spec(const ProblemSpec& spec) {
  DualBox box;
  box.lambda_max = 2.0 * (spec.reward_bound + spec.reg_bound) / spec.budget_floor;
  box.mu_max = spec.grad_bound;
  return box;
}

void project_in_place(DualPoint& p, const DualBox& box) {
  p.lambda = p.lambda.cwiseMax(0.0).cwiseMin(box.lambda_max);
  if (p.has_mu()) p.mu = p.mu.cwiseMax(-box.mu_max).cwiseMin(box.mu_max);
}

DualPoint project_dual(const DualPoint& p, const DualBox& box) {
  DualPoint out = p;
  project_in_place(out, box);
  return out;
}

BudgetState BudgetState::initial(const ProblemSpec& spec) {
  BudgetState s;
  s.remaining = spec.initial_budget();
  s.avg_remaining = spec.avg_budget;
  s.step = 0;
  return s;
}

Vector average_remaining(const Vector& remaining, int horizon, int step) {
  if (step < 0 || step >= horizon) {
    throw std::out_of_range("average_remaining: step " + std::to_string(step) +
                            " outside [0, " + std::to_string(horizon) + ")");
  }
  return remaining / static_cast<double>(horizon - step);
}

bool consume_in_place(Vector& remaining, const Vector& consumption) {
  if ((remaining.array() >= consumption.array()).all()) {
    remaining -= consumption;
    return true;
  }
  return false;
}

ConsumeOutcome try_consume(const BudgetState& state, const Matrix& cost, const Vector& x) {
  ConsumeOutcome out;
  out.state = state;
  out.state.step = state.step + 1;
  const Vector consumption = cost * x;
  out.accepted = consume_in_place(out.state.remaining, consumption);
  out.action = out.accepted ? x : Vector::Zero(x.size());
  return out;
}

}  // namespace oca
