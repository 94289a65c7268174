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

// Concave regularizers r on the average consumption a = sum_t b_t x_t / T.
//
// Besides r and its gradient, every kind exposes the split-variable maximizer
//
//   a~(mu) = argmax_{a in Z} { r(a) + mu' a } = -grad r*(-mu)
//
// and the conjugate at the negated argument r*(-mu) = r(a~) + mu' a~. The
// domain Z is the Euclidean ball of radius R = sqrt(n) D b_bar, except for
// Entropy (scaled simplex {a >= 0, sum a <= S}) and Huber (box |a_i| <= R,
// which is what the closed-form Huber conjugate assumes).

#ifndef OCA_REGULARIZER_HPP_
#define OCA_REGULARIZER_HPP_

#include <string>
#include <string_view>

#include "oca/problem.hpp"

namespace oca {

enum class RegularizerKind { kNone, kL2, kSmoothMin, kSmoothMax, kEntropy, kHuber };

std::string_view to_string(RegularizerKind kind);
/// Accepts none, l2, smooth-min, smooth-max, entropy, huber. Throws
/// std::invalid_argument otherwise.
RegularizerKind parse_regularizer_kind(std::string_view name);

class Regularizer {
 public:
  /// r = 0. The dual drops its mu block entirely.
  static Regularizer none(int dim);
  /// r(a) = -kappa ||a - shift||^2 on the ball of radius `radius`.
  static Regularizer l2(int dim, double kappa, double radius, Vector shift = Vector());
  /// r(a) = -kappa log(sum_i exp(-a_i) + exp(-radius)).
  static Regularizer smooth_min(int dim, double kappa, double radius);
  /// r(a) = -kappa log(sum_i exp(a_i) + 1).
  static Regularizer smooth_max(int dim, double kappa, double radius);
  /// r(a) = -kappa [sum u_i log u_i + (1 - sum u) log(1 - sum u)] with u = a / scale.
  /// The gradient is unbounded near the boundary, so the mu box half-width
  /// is the caller-supplied `mu_cap`.
  static Regularizer entropy(int dim, double kappa, double scale, double mu_cap);
  /// r(a) = -kappa sum_i huber_delta(a_i) on the box |a_i| <= radius.
  static Regularizer huber(int dim, double kappa, double delta, double radius);

  RegularizerKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double kappa() const { return kappa_; }
  double radius() const { return radius_; }
  double huber_delta() const { return delta_; }
  double entropy_scale() const { return scale_; }
  const Vector& shift() const { return shift_; }
  bool pins_mu() const { return kind_ == RegularizerKind::kNone; }

  /// Upper bound G on ||grad r||_inf over Z (the configured cap for Entropy).
  double grad_bound() const;
  /// Upper bound r_bar on |r| over Z.
  double value_bound() const;

  /// Membership in Z up to `tol` (absolute, scaled by the domain size).
  bool in_domain(const Vector& a, double tol = 1e-12) const;

  /// Throws DomainError outside Z.
  double value(const Vector& a) const;
  /// Throws DomainError outside Z, BoundaryError on the Entropy boundary.
  Vector grad(const Vector& a) const;

  Vector argmax_a(const Vector& mu) const;
  void argmax_a_into(const Vector& mu, Vector& out) const;
  double conj_at_neg(const Vector& mu) const;

  /// Newton settings for SmoothMin/SmoothMax maximizers.
  double newton_tolerance = 1e-10;
  int newton_max_iterations = 100;

 private:
  Regularizer(RegularizerKind kind, int dim) : kind_(kind), dim_(dim) {}

  void require_dim(const Vector& v, const char* what) const;
  void log_sum_exp_argmax(const Vector& mu, Vector& out) const;

  RegularizerKind kind_;
  int dim_;
  double kappa_ = 0.0;
  double radius_ = 0.0;
  double delta_ = 0.0;
  double scale_ = 1.0;
  double mu_cap_ = 0.0;
  Vector shift_;
};

}  // namespace oca

#endif  // OCA_REGULARIZER_HPP_
