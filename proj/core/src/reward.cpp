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

#include "oca/reward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oca/errors.hpp"

namespace oca {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double quad(double xi, double x) { return -0.25 * x * x + xi * x; }

}  // namespace

std::string_view family_name(const RewardOracle& f) {
  return std::visit(overloaded{[](const LinearBox&) { return std::string_view("linear-box"); },
                               [](const ScalarQuadratic&) { return std::string_view("scalar-quadratic"); },
                               [](const BundleSelect&) { return std::string_view("bundle-select"); }},
                    f);
}

int decision_dim(const RewardOracle& f) {
  return std::visit(overloaded{[](const LinearBox& g) { return static_cast<int>(g.value.size()); },
                               [](const ScalarQuadratic&) { return 1; },
                               [](const BundleSelect& g) { return static_cast<int>(g.value.size()); }},
                    f);
}

bool in_region(const RewardOracle& f, const Vector& x, double tol) {
  if (x.size() != decision_dim(f)) return false;
  return std::visit(
      overloaded{[&](const LinearBox& g) {
                   return x.minCoeff() >= -tol && x.maxCoeff() <= g.bound + tol;
                 },
                 [&](const ScalarQuadratic& g) { return x[0] >= -tol && x[0] <= g.bound + tol; },
                 [&](const BundleSelect&) {
                   int ones = 0;
                   for (Eigen::Index i = 0; i < x.size(); ++i) {
                     if (std::abs(x[i] - 1.0) <= tol) {
                       ++ones;
                     } else if (std::abs(x[i]) > tol) {
                       return false;
                     }
                   }
                   return ones <= 1;
                 }},
      f);
}

double reward(const RewardOracle& f, const Vector& x) {
  if (!in_region(f, x)) {
    throw DomainError(std::string("reward: action outside the ") + std::string(family_name(f)) +
                      " decision region");
  }
  return std::visit(overloaded{[&](const LinearBox& g) { return g.value.dot(x); },
                               [&](const ScalarQuadratic& g) { return quad(g.xi, x[0]); },
                               [&](const BundleSelect& g) { return g.value.dot(x); }},
                    f);
}

double reward_sup(const RewardOracle& f) {
  return std::visit(
      overloaded{[](const LinearBox& g) {
                   return std::max(g.bound * g.value.cwiseMax(0.0).sum(),
                                   -g.bound * g.value.cwiseMin(0.0).sum());
                 },
                 [](const ScalarQuadratic& g) {
                   // concave parabola on [0, D]: extremes at the endpoints or the vertex 2 xi
                   double best = std::abs(quad(g.xi, g.bound));
                   const double vertex = 2.0 * g.xi;
                   if (vertex > 0.0 && vertex < g.bound) best = std::max(best, std::abs(quad(g.xi, vertex)));
                   return best;
                 },
                 [](const BundleSelect& g) { return g.value.size() ? g.value.cwiseAbs().maxCoeff() : 0.0; }},
      f);
}

void primal_argmax_into(const RewardOracle& f, const Vector& w, Vector& x) {
  std::visit(overloaded{[&](const LinearBox& g) {
                          x.resize(g.value.size());
                          for (Eigen::Index i = 0; i < x.size(); ++i) {
                            x[i] = g.value[i] - w[i] > 0.0 ? g.bound : 0.0;
                          }
                        },
                        [&](const ScalarQuadratic& g) {
                          x.resize(1);
                          x[0] = std::clamp(2.0 * (g.xi - w[0]), 0.0, g.bound);
                        },
                        [&](const BundleSelect& g) {
                          x.setZero(g.value.size());
                          Eigen::Index best = -1;
                          double top = 0.0;
                          for (Eigen::Index i = 0; i < g.value.size(); ++i) {
                            const double net = g.value[i] - w[i];
                            if (net > top) {
                              top = net;
                              best = i;
                            }
                          }
                          if (best >= 0) x[best] = 1.0;
                        }},
             f);
}

Vector primal_argmax(const RewardOracle& f, const Matrix& cost, const Vector& nu) {
  const Vector w = cost.transpose() * nu;
  Vector x;
  primal_argmax_into(f, w, x);
  return x;
}

double conj_at_charge(const RewardOracle& f, const Vector& w, Vector& x) {
  primal_argmax_into(f, w, x);
  return std::visit(overloaded{[&](const LinearBox& g) { return (g.value - w).dot(x); },
                               [&](const ScalarQuadratic& g) { return quad(g.xi, x[0]) - w[0] * x[0]; },
                               [&](const BundleSelect& g) { return (g.value - w).dot(x); }},
                    f);
}

double conj(const RewardOracle& f, const Matrix& cost, const Vector& nu) {
  const Vector w = cost.transpose() * nu;
  Vector x;
  return conj_at_charge(f, w, x);
}

}  // namespace oca
