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

// Reward oracles f_t. For a price nu in R^m the per-unit charge on the
// decision is w = b' nu, and each family provides
//
//   x~(w)  = argmax_{x in X} f(x) - w' x
//   f*(w)  = f(x~) - w' x~
//
// Ties between acting and the void action resolve to the void side.

#ifndef OCA_REWARD_HPP_
#define OCA_REWARD_HPP_

#include <string_view>
#include <variant>

#include "oca/problem.hpp"

namespace oca {

/// f(x) = value' x on the box 0 <= x_i <= bound.
struct LinearBox {
  Vector value;
  double bound = 1.0;
};

/// f(x) = -x^2 / 4 + xi x on [0, bound]. Scalar decision.
struct ScalarQuadratic {
  double xi = 0.0;
  double bound = 1.0;
};

/// f(x) = value' x over x in {0,1}^n with at most one coordinate set.
struct BundleSelect {
  Vector value;
};

using RewardOracle = std::variant<LinearBox, ScalarQuadratic, BundleSelect>;

/// One arrival: reward oracle and m x n cost matrix b_t.
struct Request {
  RewardOracle reward;
  Matrix cost;
};

std::string_view family_name(const RewardOracle& f);
int decision_dim(const RewardOracle& f);

/// Membership in the family's decision region up to `tol`.
bool in_region(const RewardOracle& f, const Vector& x, double tol = 1e-12);

/// f(x). Throws DomainError outside the decision region.
double reward(const RewardOracle& f, const Vector& x);

/// sup |f| over the decision region.
double reward_sup(const RewardOracle& f);

/// x~ for price nu: w = b' nu.
Vector primal_argmax(const RewardOracle& f, const Matrix& cost, const Vector& nu);
/// x~ for a precomputed per-unit charge w (size n). Writes into `x`.
void primal_argmax_into(const RewardOracle& f, const Vector& w, Vector& x);

/// f*(b' nu).
double conj(const RewardOracle& f, const Matrix& cost, const Vector& nu);
/// f*(w) for a precomputed charge w. `x` receives x~.
double conj_at_charge(const RewardOracle& f, const Vector& w, Vector& x);

}  // namespace oca

#endif  // OCA_REWARD_HPP_
