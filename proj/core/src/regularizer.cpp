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

#include "oca/regularizer.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "oca/errors.hpp"

namespace oca {
namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("Regularizer: ") + what + " must be finite and > 0");
  }
}

double huber_loss(double u, double delta) {
  const double au = std::abs(u);
  return au <= delta ? 0.5 * u * u : delta * (au - 0.5 * delta);
}

double huber_slope(double u, double delta) {
  return std::abs(u) <= delta ? u : std::copysign(delta, u);
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// log(sum_i exp(z_i) + exp(z0)), stable.
double log_sum_exp(const Vector& z, double z0) {
  const double top = std::max(z.size() > 0 ? z.maxCoeff() : z0, z0);
  return top + std::log((z.array() - top).exp().sum() + std::exp(z0 - top));
}

}  // namespace

std::string_view to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::kNone:
      return "none";
    case RegularizerKind::kL2:
      return "l2";
    case RegularizerKind::kSmoothMin:
      return "smooth-min";
    case RegularizerKind::kSmoothMax:
      return "smooth-max";
    case RegularizerKind::kEntropy:
      return "entropy";
    case RegularizerKind::kHuber:
      return "huber";
  }
  return "unknown";
}

RegularizerKind parse_regularizer_kind(std::string_view name) {
  for (auto kind : {RegularizerKind::kNone, RegularizerKind::kL2, RegularizerKind::kSmoothMin,
                    RegularizerKind::kSmoothMax, RegularizerKind::kEntropy, RegularizerKind::kHuber}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown regularizer kind '" + std::string(name) + "'");
}

Regularizer Regularizer::none(int dim) {
  if (dim < 1) throw std::invalid_argument("Regularizer: dim must be >= 1");
  return Regularizer(RegularizerKind::kNone, dim);
}

Regularizer Regularizer::l2(int dim, double kappa, double radius, Vector shift) {
  if (dim < 1) throw std::invalid_argument("Regularizer: dim must be >= 1");
  require_positive(kappa, "kappa");
  require_positive(radius, "radius");
  Regularizer r(RegularizerKind::kL2, dim);
  r.kappa_ = kappa;
  r.radius_ = radius;
  r.shift_ = shift.size() == 0 ? Vector::Zero(dim) : std::move(shift);
  if (r.shift_.size() != dim) throw std::invalid_argument("Regularizer: shift has wrong size");
  return r;
}

Regularizer Regularizer::smooth_min(int dim, double kappa, double radius) {
  if (dim < 1) throw std::invalid_argument("Regularizer: dim must be >= 1");
  require_positive(kappa, "kappa");
  require_positive(radius, "radius");
  Regularizer r(RegularizerKind::kSmoothMin, dim);
  r.kappa_ = kappa;
  r.radius_ = radius;
  return r;
}

Regularizer Regularizer::smooth_max(int dim, double kappa, double radius) {
  if (dim < 1) throw std::invalid_argument("Regularizer: dim must be >= 1");
  require_positive(kappa, "kappa");
  require_positive(radius, "radius");
  Regularizer r(RegularizerKind::kSmoothMax, dim);
  r.kappa_ = kappa;
  r.radius_ = radius;
  return r;
}

Regularizer Regularizer::entropy(int dim, double kappa, double scale, double mu_cap) {
  if (dim < 1) throw std::invalid_argument("Regularizer: dim must be >= 1");
  require_positive(kappa, "kappa");
  require_positive(scale, "scale");
  require_positive(mu_cap, "mu_cap");
  Regularizer r(RegularizerKind::kEntropy, dim);
  r.kappa_ = kappa;
  r.scale_ = scale;
  r.radius_ = scale;
  r.mu_cap_ = mu_cap;
  return r;
}

Regularizer Regularizer::huber(int dim, double kappa, double delta, double radius) {
  if (dim < 1) throw std::invalid_argument("Regularizer: dim must be >= 1");
  require_positive(kappa, "kappa");
  require_positive(delta, "delta");
  require_positive(radius, "radius");
  if (radius < delta) throw std::invalid_argument("Regularizer: huber radius must be >= delta");
  Regularizer r(RegularizerKind::kHuber, dim);
  r.kappa_ = kappa;
  r.delta_ = delta;
  r.radius_ = radius;
  return r;
}

double Regularizer::grad_bound() const {
  switch (kind_) {
    case RegularizerKind::kNone:
      return 0.0;
    case RegularizerKind::kL2:
      return 2.0 * kappa_ * (radius_ + shift_.cwiseAbs().maxCoeff());
    case RegularizerKind::kSmoothMin:
    case RegularizerKind::kSmoothMax:
      return kappa_;
    case RegularizerKind::kEntropy:
      return mu_cap_;
    case RegularizerKind::kHuber:
      return kappa_ * delta_;
  }
  return 0.0;
}

double Regularizer::value_bound() const {
  const double m = dim_;
  switch (kind_) {
    case RegularizerKind::kNone:
      return 0.0;
    case RegularizerKind::kL2: {
      const double reach = radius_ + shift_.norm();
      return kappa_ * reach * reach;
    }
    case RegularizerKind::kSmoothMin:
    case RegularizerKind::kSmoothMax:
      return kappa_ * (radius_ + std::log(m + 1.0));
    case RegularizerKind::kEntropy:
      return kappa_ * std::log(m + 1.0);
    case RegularizerKind::kHuber:
      return kappa_ * m * delta_ * (radius_ - 0.5 * delta_);
  }
  return 0.0;
}

void Regularizer::require_dim(const Vector& v, const char* what) const {
  if (v.size() != dim_) {
    throw std::invalid_argument(std::string("Regularizer: ") + what + " has size " +
                                std::to_string(v.size()) + ", expected " + std::to_string(dim_));
  }
}

bool Regularizer::in_domain(const Vector& a, double tol) const {
  if (a.size() != dim_) return false;
  const double slack = tol * std::max(1.0, radius_);
  switch (kind_) {
    case RegularizerKind::kEntropy:
      return a.minCoeff() >= -slack && a.sum() <= scale_ + slack;
    case RegularizerKind::kHuber:
      return a.cwiseAbs().maxCoeff() <= radius_ + slack;
    case RegularizerKind::kNone:
    case RegularizerKind::kL2:
    case RegularizerKind::kSmoothMin:
    case RegularizerKind::kSmoothMax:
      return a.norm() <= radius_ + slack;
  }
  return false;
}

double Regularizer::value(const Vector& a) const {
  require_dim(a, "argument");
  if (kind_ == RegularizerKind::kNone) return 0.0;
  if (!in_domain(a)) throw DomainError("Regularizer::value: argument outside the regularizer domain");
  switch (kind_) {
    case RegularizerKind::kNone:
      return 0.0;
    case RegularizerKind::kL2:
      return -kappa_ * (a - shift_).squaredNorm();
    case RegularizerKind::kSmoothMin:
      return -kappa_ * log_sum_exp(-a, -radius_);
    case RegularizerKind::kSmoothMax:
      return -kappa_ * log_sum_exp(a, 0.0);
    case RegularizerKind::kEntropy: {
      const Vector u = (a / scale_).cwiseMax(0.0);
      const double slack = std::max(0.0, 1.0 - u.sum());
      double h = xlogx(slack);
      for (Eigen::Index i = 0; i < u.size(); ++i) h += xlogx(u[i]);
      return -kappa_ * h;
    }
    case RegularizerKind::kHuber: {
      double s = 0.0;
      for (Eigen::Index i = 0; i < a.size(); ++i) s += huber_loss(a[i], delta_);
      return -kappa_ * s;
    }
  }
  return 0.0;
}

Vector Regularizer::grad(const Vector& a) const {
  require_dim(a, "argument");
  if (kind_ == RegularizerKind::kNone) return Vector::Zero(dim_);
  if (!in_domain(a)) throw DomainError("Regularizer::grad: argument outside the regularizer domain");
  switch (kind_) {
    case RegularizerKind::kNone:
      return Vector::Zero(dim_);
    case RegularizerKind::kL2:
      return -2.0 * kappa_ * (a - shift_);
    case RegularizerKind::kSmoothMin: {
      const double lse = log_sum_exp(-a, -radius_);
      return kappa_ * (-a.array() - lse).exp().matrix();
    }
    case RegularizerKind::kSmoothMax: {
      const double lse = log_sum_exp(a, 0.0);
      return -kappa_ * (a.array() - lse).exp().matrix();
    }
    case RegularizerKind::kEntropy: {
      const Vector u = a / scale_;
      const double slack = 1.0 - u.sum();
      if (u.minCoeff() <= 0.0 || slack <= 0.0) {
        throw BoundaryError("Regularizer::grad: entropy gradient is unbounded on the simplex boundary");
      }
      return -(kappa_ / scale_) * (u.array().log() - std::log(slack)).matrix();
    }
    case RegularizerKind::kHuber: {
      Vector g(dim_);
      for (Eigen::Index i = 0; i < a.size(); ++i) g[i] = -kappa_ * huber_slope(a[i], delta_);
      return g;
    }
  }
  return Vector::Zero(dim_);
}

Vector Regularizer::argmax_a(const Vector& mu) const {
  Vector out;
  argmax_a_into(mu, out);
  return out;
}

void Regularizer::argmax_a_into(const Vector& mu, Vector& out) const {
  out.resize(dim_);
  switch (kind_) {
    case RegularizerKind::kNone:
      out.setZero();
      return;
    case RegularizerKind::kL2: {
      require_dim(mu, "mu");
      out = shift_ + mu / (2.0 * kappa_);
      const double n = out.norm();
      if (n > radius_) out *= radius_ / n;
      return;
    }
    case RegularizerKind::kEntropy: {
      require_dim(mu, "mu");
      const Vector z = (scale_ / kappa_) * mu;
      const double lse = log_sum_exp(z, 0.0);
      out = scale_ * (z.array() - lse).exp().matrix();
      return;
    }
    case RegularizerKind::kHuber: {
      require_dim(mu, "mu");
      const double knee = kappa_ * delta_;
      for (Eigen::Index i = 0; i < mu.size(); ++i) {
        out[i] = std::abs(mu[i]) <= knee ? mu[i] / kappa_ : std::copysign(radius_, mu[i]);
      }
      return;
    }
    case RegularizerKind::kSmoothMin:
    case RegularizerKind::kSmoothMax:
      require_dim(mu, "mu");
      log_sum_exp_argmax(mu, out);
      return;
  }
}

// Both smooth kinds share r(a) = -kappa * log(sum_i exp(s a_i) + exp(c0)) with
// s = +1, c0 = 0 (max) or s = -1, c0 = -R (min). Writing p_i for the softmax
// weights, grad r = -kappa s p and hess r = -kappa (diag p - p p').
void Regularizer::log_sum_exp_argmax(const Vector& mu, Vector& out) const {
  const double s = kind_ == RegularizerKind::kSmoothMax ? 1.0 : -1.0;
  const double c0 = kind_ == RegularizerKind::kSmoothMax ? 0.0 : -radius_;
  const Eigen::Index m = dim_;

  // Interior stationary point: kappa p = s mu with p > 0 and sum p < 1.
  const Vector p_star = s * mu / kappa_;
  const double p_mass = p_star.sum();
  if (p_star.minCoeff() > 0.0 && p_mass < 1.0) {
    out = s * ((p_star.array() / (1.0 - p_mass)).log() + c0).matrix();
    if (out.norm() <= radius_) return;
  }

  // Otherwise the maximizer sits on the sphere ||a|| = R with multiplier
  // gamma > 0: a(gamma) = argmax r(a) + mu'a - gamma ||a||^2 and ||a(gamma)||
  // decreases in gamma.
  Vector p(m), g(m), step(m), trial(m);
  Matrix h(m, m);
  auto softmax = [&](const Vector& a, Vector& weights) {
    const Vector z = s * a;
    const double lse = log_sum_exp(z, c0);
    weights = (z.array() - lse).exp().matrix();
    return lse;
  };
  auto objective = [&](const Vector& a, double gamma) {
    const Vector z = s * a;
    return -kappa_ * log_sum_exp(z, c0) + mu.dot(a) - gamma * a.squaredNorm();
  };
  auto solve = [&](double gamma, Vector& a) {
    for (int it = 0; it < newton_max_iterations; ++it) {
      softmax(a, p);
      g = -kappa_ * s * p + mu - 2.0 * gamma * a;
      if (g.lpNorm<Eigen::Infinity>() <= newton_tolerance) return;
      h = kappa_ * Matrix(p.asDiagonal()) - kappa_ * p * p.transpose();
      h.diagonal().array() += 2.0 * gamma;
      step = h.ldlt().solve(g);
      const double f0 = objective(a, gamma);
      const double slope = g.dot(step);
      double t = 1.0;
      for (int ls = 0; ls < 60; ++ls) {
        trial = a + t * step;
        if (objective(trial, gamma) >= f0 + 1e-4 * t * slope) break;
        t *= 0.5;
      }
      if (trial == a) return;  // no representable progress left
      a = trial;
    }
    softmax(a, p);
    g = -kappa_ * s * p + mu - 2.0 * gamma * a;
    if (g.lpNorm<Eigen::Infinity>() > newton_tolerance * 1e3) {
      throw ConvergenceError("Regularizer::argmax_a: Newton did not converge", newton_max_iterations,
                             g.lpNorm<Eigen::Infinity>());
    }
  };

  const double gamma_hi0 = 1.01 * (mu.norm() + kappa_) / (2.0 * radius_);
  double hi = gamma_hi0;
  double lo = gamma_hi0 * 1e-3;
  Vector a = Vector::Zero(m);
  solve(hi, a);
  Vector a_hi = a;
  // Walk lo down until the solution leaves the ball.
  Vector a_lo = a;
  for (int k = 0;; ++k) {
    solve(lo, a_lo);
    if (a_lo.norm() >= radius_) break;
    if (k > 40) break;  // solution is numerically on the sphere already
    hi = lo;
    a_hi = a_lo;
    lo *= 1e-3;
  }
  a = a_hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (hi - lo <= 1e-15 * hi) break;
    Vector a_mid = a;
    solve(mid, a_mid);
    const double n = a_mid.norm();
    if (std::abs(n - radius_) <= 1e-13 * radius_) {
      a = a_mid;
      break;
    }
    if (n > radius_) {
      lo = mid;
    } else {
      hi = mid;
      a = a_mid;
    }
  }
  const double n = a.norm();
  if (n > 0.0) a *= radius_ / n;
  out = a;
}

double Regularizer::conj_at_neg(const Vector& mu) const {
  switch (kind_) {
    case RegularizerKind::kNone:
      return 0.0;
    case RegularizerKind::kEntropy: {
      require_dim(mu, "mu");
      return kappa_ * log_sum_exp((scale_ / kappa_) * mu, 0.0);
    }
    case RegularizerKind::kHuber: {
      require_dim(mu, "mu");
      const double knee = kappa_ * delta_;
      double total = 0.0;
      for (Eigen::Index i = 0; i < mu.size(); ++i) {
        const double am = std::abs(mu[i]);
        total += am <= knee ? mu[i] * mu[i] / (2.0 * kappa_)
                            : radius_ * am - kappa_ * delta_ * (radius_ - 0.5 * delta_);
      }
      return total;
    }
    case RegularizerKind::kL2:
    case RegularizerKind::kSmoothMin:
    case RegularizerKind::kSmoothMax: {
      const Vector a = argmax_a(mu);
      return value(a) + mu.dot(a);
    }
  }
  return 0.0;
}

}  // namespace oca
