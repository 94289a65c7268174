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

// Solvers for the t-sample empirical dual
//
//   D_t(lambda, mu; d) = (1/t) sum_j f_j*(b_j' (lambda + mu)) + r*(-mu) + d' lambda
//
// minimized over the box [0, lambda_max]^m x [-G, G]^m.

#ifndef OCA_DUAL_SOLVER_HPP_
#define OCA_DUAL_SOLVER_HPP_

#include <cstdint>
#include <random>
#include <span>

#include "oca/problem.hpp"
#include "oca/regularizer.hpp"
#include "oca/reward.hpp"

namespace oca {

class SaaDual {
 public:
  /// The history, regularizer and budget are referenced, not copied, and
  /// must outlive the SaaDual.
  SaaDual(std::span<const Request> history, const Vector& budget, const Regularizer& reg, DualBox box);

  int samples() const { return static_cast<int>(history_.size()); }
  int resources() const { return static_cast<int>(budget_->size()); }
  bool with_mu() const { return !reg_->pins_mu(); }
  std::span<const Request> history() const { return history_; }
  const Vector& budget() const { return *budget_; }
  const Regularizer& regularizer() const { return *reg_; }
  const DualBox& box() const { return box_; }

  /// Dual point at the origin with the right block structure.
  DualPoint origin() const { return DualPoint::zero(resources(), with_mu()); }

  double eval(const DualPoint& p) const;
  /// Stacked (lambda block, mu block) stochastic gradient of sample zeta.
  Vector sample_gradient(int zeta, const DualPoint& p) const;
  /// Full-batch gradient (the average of all sample gradients).
  Vector gradient(const DualPoint& p) const;
  /// Objective and full-batch gradient in one pass.
  double eval_with_gradient(const DualPoint& p, Vector& grad) const;

 private:
  std::span<const Request> history_;
  const Vector* budget_;
  const Regularizer* reg_;
  DualBox box_;
};

enum class StepRule { kConstant, kHarmonic };
enum class Averaging { kUniform, kLastIterate };

struct SgdSchedule {
  std::int64_t steps = 1;
  StepRule rule = StepRule::kConstant;
  double eta = 1.0;  // constant step, or the numerator c of c / k
  Averaging averaging = Averaging::kUniform;

  /// eta = sqrt(2) R / (L sqrt(K)) with uniform averaging.
  static SgdSchedule constant(std::int64_t steps, double radius, double lipschitz);
  /// eta_k = c / k with last-iterate output.
  static SgdSchedule harmonic(std::int64_t steps, double c);

  double step_size(std::int64_t k) const { return rule == StepRule::kConstant ? eta : eta / k; }
  void validate() const;
};

/// R = sqrt(m (2 (f_bar + r_bar) / d_floor + G)).
double sgd_radius(const ProblemSpec& spec);
/// L = sqrt(m d_ceil^2 + 2 n b_bar^2 D^2 + n G^2).
double sgd_lipschitz(const ProblemSpec& spec);

/// Projected SGD with zeta drawn uniformly with replacement from the
/// history. Every iterate stays in the box.
DualPoint sgd_solve(const SaaDual& p, const DualPoint& start, const SgdSchedule& sched,
                    std::mt19937_64& rng);

struct BatchResult {
  DualPoint point;
  double objective = 0.0;
  double grad_map_norm = 0.0;  // ||p_k - p_{k-1}||_inf / eta at exit
  int iterations = 0;
  bool converged = false;
  bool stalled = false;  // stopped by the stall rule before reaching tol
};

struct BatchOptions {
  int max_iterations = 10000;
  double initial_step = 1.0;
  double shrink = 0.5;
  double armijo = 1e-4;
  double min_step = 1e-14;
  /// Stop once the last `stall_window` accepted steps together lower the
  /// objective by less than stall_decrease * max(1, |f|). 0 disables.
  int stall_window = 50;
  double stall_decrease = 1e-9;
};

/// Projected full-batch gradient descent with Armijo backtracking, stopped
/// once the gradient-map norm falls to `tol` or progress stalls. Never
/// throws on exhaustion; `converged`, `stalled` and `grad_map_norm` report
/// the outcome.
BatchResult batch_solve(const SaaDual& p, const DualPoint& start, double tol,
                        const BatchOptions& opts = {});

}  // namespace oca

#endif  // OCA_DUAL_SOLVER_HPP_
