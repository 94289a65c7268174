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

// Seeded request generators.
//
//   I        LinearBox a ~ U(0,10)^n, b ~ U(0,1)^{m x n}, d_i = 0.1,
//            r(a) = -kappa ||a - d/2||^2
//   II       a = clamp(theta' b + delta 1, 0, 10), theta ~ N(0, I_m),
//            delta ~ N(0,1), b_ij ~ Bernoulli(p_i), p_i = (1 + alpha_i)/2,
//            alpha_i ~ Beta(1,3), d_i ~ U(0.25, 0.75), same r as I
//   III      f(x) = -x^2/4 + xi x, xi in {1/2, 3/4}, b = 1, d = 1/2, r = 0
//   IV       one-of-m ad assignment, q ~ Beta(2,8)^m, b = I_m,
//            d_i ~ U(0.05, 0.2) scaled to sum <= 1, entropic r
//   lp       LinearBox v ~ U(0,1)^n, b ~ U(0,1)^{m x n}, d = 0.25, r = 0
//   welfare  BundleSelect v ~ U(0,1)^n over a fixed bundle matrix
//            B ~ U(0,1)^{m x n}, d = 0.25, r(a) = -kappa ||a - d/2||^2
//
// kappa = 0 selects r = 0 for every model.

#ifndef OCA_INPUTS_HPP_
#define OCA_INPUTS_HPP_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "oca/problem.hpp"
#include "oca/regularizer.hpp"
#include "oca/reward.hpp"

namespace oca {

enum class InputModel { kI, kII, kIII, kIV, kOnlineLp, kWelfare };

std::string_view to_string(InputModel m);
/// I, II, III, IV (or IV-synthetic), lp, welfare. Throws std::invalid_argument.
InputModel parse_input_model(std::string_view name);

struct InputModelSpec {
  InputModel model = InputModel::kIII;
  int horizon = 256;
  int resources = 0;     // 0 picks the model default
  int decision_dim = 0;  // 0 picks the model default
  double kappa = 0.0;
  std::uint64_t seed = 0;
  /// Entropic mu box half-width in units of kappa / sum(d).
  double entropy_mu_cap = 10.0;
  /// Replaces the model's default regularizer when kappa > 0.
  std::optional<RegularizerKind> regularizer;
  double huber_delta = 1.0;

  void validate() const;
};

struct Instance {
  ProblemSpec spec;
  Regularizer reg = Regularizer::none(1);
  std::vector<Request> stream;
};

/// Deterministic in `spec`, including the per-instance parameters
/// (budgets, Bernoulli rates, bundle matrix).
Instance generate(const InputModelSpec& spec);

/// Synthetic display-advertising stream (model IV).
Instance synthetic_ads(const InputModelSpec& spec);

/// Swaps in a regularizer of `kind` sized to the instance (radius
/// sqrt(n) D b_bar, Entropy scale sum(d)) and refreshes r_bar and G.
void attach_regularizer(Instance& inst, RegularizerKind kind, double kappa, double huber_delta = 1.0,
                        double entropy_mu_cap = 10.0);

/// Largest singular value of b.
double spectral_norm(const Matrix& b);

}  // namespace oca

#endif  // OCA_INPUTS_HPP_
