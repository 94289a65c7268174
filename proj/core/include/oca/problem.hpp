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

// Shared problem dimensions, dual-variable representation and resource
// bookkeeping for regularized online allocation:
//
//   max  sum_t f_t(x_t) + T * r(sum_t b_t x_t / T)
//   s.t. sum_t b_t x_t <= d T,   x_t in X.
//
// Every allocator keeps a remaining budget B_t and proposes actions priced by
// a stacked dual (lambda, mu). Actions that would drive any component of B_t
// negative are replaced by the void action.

#ifndef OCA_PROBLEM_HPP_
#define OCA_PROBLEM_HPP_

#include <Eigen/Core>

namespace oca {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dimensions and distribution bounds of one allocation problem.
///
/// The bounds are the constants a generator knows analytically about its
/// request distribution: |f_t| <= reward_bound on X, ||b_t||_2 <= cost_bound,
/// |r| <= reg_bound and ||grad r||_inf <= grad_bound on the regularizer domain.
/// Every avg_budget component must lie strictly inside
/// (budget_floor, budget_ceiling).
struct ProblemSpec {
  int horizon = 1;
  int resources = 1;
  int decision_dim = 1;
  Vector avg_budget;
  double action_bound = 1.0;
  double reward_bound = 1.0;
  double cost_bound = 1.0;
  double reg_bound = 0.0;
  double grad_bound = 0.0;
  double budget_floor = 0.0;
  double budget_ceiling = 1.0;

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;

  Vector initial_budget() const { return avg_budget * static_cast<double>(horizon); }

  /// Radius sqrt(n) * D * b_bar of the set containing every consumption b x.
  double consumption_radius() const;
};

/// Stacked dual (lambda, mu). When the regularizer pins mu to zero the mu
/// block is empty and the dual lives in R^m only.
struct DualPoint {
  Vector lambda;
  Vector mu;

  static DualPoint zero(int resources, bool with_mu);

  bool has_mu() const { return mu.size() > 0; }
  Eigen::Index dim() const { return lambda.size() + mu.size(); }

  /// Combined price nu = lambda + mu charged per unit of resource.
  Vector price() const;
  void price_into(Vector& out) const;

  Vector stacked() const;
};

/// Box Omega_lambda x Omega_mu known to contain every optimal dual.
struct DualBox {
  double lambda_max = 1.0;
  double mu_max = 0.0;

  /// lambda_max = 2 (f_bar + r_bar) / d_floor, mu_max = G.
  static DualBox from_spec(const ProblemSpec& spec);
};

/// Componentwise clamp onto the box. Idempotent and non-expansive in every
/// l_p norm.
DualPoint project_dual(const DualPoint& p, const DualBox& box);
void project_in_place(DualPoint& p, const DualBox& box);

struct BudgetState {
  Vector remaining;      // B_t
  Vector avg_remaining;  // d_t
  int step = 0;          // t

  static BudgetState initial(const ProblemSpec& spec);
};

/// B / (T - t). Throws std::out_of_range unless 0 <= t < T.
Vector average_remaining(const Vector& remaining, int horizon, int step);

struct ConsumeOutcome {
  Vector action;
  BudgetState state;
  bool accepted = false;
};

/// Accepts x only if remaining >= cost * x in every component (all-or-nothing).
/// Negative consumption replenishes the budget. The returned state has its
/// step advanced; avg_remaining is left for the caller to refresh.
ConsumeOutcome try_consume(const BudgetState& state, const Matrix& cost, const Vector& x);

/// Allocation-free core of try_consume: checks remaining >= consumption and,
/// if so, subtracts it. Returns whether the action was accepted.
bool consume_in_place(Vector& remaining, const Vector& consumption);

}  // namespace oca

#endif  // OCA_PROBLEM_HPP_
