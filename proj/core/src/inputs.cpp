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

#include "oca/inputs.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace oca {
namespace {

using Rng = std::mt19937_64;

double beta_draw(Rng& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

Matrix uniform_matrix(Rng& rng, int rows, int cols, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix out(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) out(i, j) = u(rng);
  return out;
}

Vector uniform_vector(Rng& rng, int size, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector out(size);
  for (int i = 0; i < size; ++i) out[i] = u(rng);
  return out;
}

void set_budget_bounds(ProblemSpec& spec) {
  spec.budget_floor = 0.5 * spec.avg_budget.minCoeff();
  spec.budget_ceiling = 2.0 * spec.avg_budget.maxCoeff();
}

// r(a) = -kappa ||a - d/2||^2 on the ball of radius sqrt(n) D b_bar.
void attach_shifted_l2(Instance& inst, double kappa) {
  ProblemSpec& s = inst.spec;
  if (kappa == 0.0) {
    inst.reg = Regularizer::none(s.resources);
    return;
  }
  const double radius = s.consumption_radius();
  const Vector shift = 0.5 * s.avg_budget;
  inst.reg = Regularizer::l2(s.resources, kappa, radius, shift);
  s.reg_bound = inst.reg.value_bound();
  s.grad_bound = 2.0 * kappa * (radius + shift.norm());
}

int pick(int requested, int fallback) { return requested > 0 ? requested : fallback; }

Instance model_one(const InputModelSpec& in) {
  Rng rng(in.seed);
  Instance inst;
  ProblemSpec& s = inst.spec;
  s.horizon = in.horizon;
  s.resources = pick(in.resources, 6);
  s.decision_dim = pick(in.decision_dim, 6);
  s.avg_budget = Vector::Constant(s.resources, 0.1);
  s.action_bound = 1.0;
  s.cost_bound = std::sqrt(static_cast<double>(s.resources * s.decision_dim));
  s.reward_bound = 10.0 * s.decision_dim * s.action_bound;
  set_budget_bounds(s);
  attach_shifted_l2(inst, in.kappa);
  inst.stream.reserve(in.horizon);
  for (int t = 0; t < in.horizon; ++t) {
    LinearBox f{uniform_vector(rng, s.decision_dim, 0.0, 10.0), s.action_bound};
    Matrix b = uniform_matrix(rng, s.resources, s.decision_dim, 0.0, 1.0);
    inst.stream.push_back(Request{std::move(f), std::move(b)});
  }
  return inst;
}

Instance model_two(const InputModelSpec& in) {
  Rng rng(in.seed);
  Instance inst;
  ProblemSpec& s = inst.spec;
  s.horizon = in.horizon;
  s.resources = pick(in.resources, 6);
  s.decision_dim = pick(in.decision_dim, 6);
  const int m = s.resources;
  const int n = s.decision_dim;
  Vector p(m);
  for (int i = 0; i < m; ++i) p[i] = 0.5 * (1.0 + beta_draw(rng, 1.0, 3.0));
  s.avg_budget = uniform_vector(rng, m, 0.25, 0.75);
  s.action_bound = 1.0;
  s.cost_bound = std::sqrt(static_cast<double>(m * n));
  s.reward_bound = 10.0 * n * s.action_bound;
  set_budget_bounds(s);
  attach_shifted_l2(inst, in.kappa);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  inst.stream.reserve(in.horizon);
  for (int t = 0; t < in.horizon; ++t) {
    Matrix b(m, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < m; ++i) b(i, j) = unit(rng) < p[i] ? 1.0 : 0.0;
    Vector theta(m);
    for (int i = 0; i < m; ++i) theta[i] = normal(rng);
    const double delta = normal(rng);
    Vector a = (b.transpose() * theta).array() + delta;
    a = a.cwiseMax(0.0).cwiseMin(10.0);
    inst.stream.push_back(Request{LinearBox{std::move(a), s.action_bound}, std::move(b)});
  }
  return inst;
}

Instance model_three(const InputModelSpec& in) {
  Rng rng(in.seed);
  Instance inst;
  ProblemSpec& s = inst.spec;
  s.horizon = in.horizon;
  s.resources = 1;
  s.decision_dim = 1;
  s.avg_budget = Vector::Constant(1, 0.5);
  s.action_bound = 1.0;
  s.cost_bound = 1.0;
  s.reward_bound = 9.0 / 16.0;  // max over [0,1] of -x^2/4 + 3x/4, at x = 1
  set_budget_bounds(s);
  if (in.kappa != 0.0) throw std::invalid_argument("generate: model III has no regularizer (kappa must be 0)");
  inst.reg = Regularizer::none(1);
  std::bernoulli_distribution coin(0.5);
  const Matrix one = Matrix::Constant(1, 1, 1.0);
  inst.stream.reserve(in.horizon);
  for (int t = 0; t < in.horizon; ++t) {
    const double xi = coin(rng) ? 0.75 : 0.5;
    inst.stream.push_back(Request{ScalarQuadratic{xi, s.action_bound}, one});
  }
  return inst;
}

Instance model_lp(const InputModelSpec& in) {
  Rng rng(in.seed);
  Instance inst;
  ProblemSpec& s = inst.spec;
  s.horizon = in.horizon;
  s.resources = pick(in.resources, 4);
  s.decision_dim = pick(in.decision_dim, 1);
  s.avg_budget = Vector::Constant(s.resources, 0.25);
  s.action_bound = 1.0;
  s.cost_bound = std::sqrt(static_cast<double>(s.resources * s.decision_dim));
  s.reward_bound = static_cast<double>(s.decision_dim) * s.action_bound;
  set_budget_bounds(s);
  if (in.kappa != 0.0) throw std::invalid_argument("generate: the lp model has no regularizer (kappa must be 0)");
  inst.reg = Regularizer::none(s.resources);
  inst.stream.reserve(in.horizon);
  for (int t = 0; t < in.horizon; ++t) {
    LinearBox f{uniform_vector(rng, s.decision_dim, 0.0, 1.0), s.action_bound};
    Matrix b = uniform_matrix(rng, s.resources, s.decision_dim, 0.0, 1.0);
    inst.stream.push_back(Request{std::move(f), std::move(b)});
  }
  return inst;
}

Instance model_welfare(const InputModelSpec& in) {
  Rng rng(in.seed);
  Instance inst;
  ProblemSpec& s = inst.spec;
  s.horizon = in.horizon;
  s.resources = pick(in.resources, 4);
  s.decision_dim = pick(in.decision_dim, 3);
  s.avg_budget = Vector::Constant(s.resources, 0.25);
  s.action_bound = 1.0;
  const Matrix bundles = uniform_matrix(rng, s.resources, s.decision_dim, 0.0, 1.0);
  s.cost_bound = std::sqrt(static_cast<double>(s.resources * s.decision_dim));
  s.reward_bound = 1.0;
  set_budget_bounds(s);
  attach_shifted_l2(inst, in.kappa);
  inst.stream.reserve(in.horizon);
  for (int t = 0; t < in.horizon; ++t) {
    inst.stream.push_back(Request{BundleSelect{uniform_vector(rng, s.decision_dim, 0.0, 1.0)}, bundles});
  }
  return inst;
}

}  // namespace

std::string_view to_string(InputModel m) {
  switch (m) {
    case InputModel::kI:
      return "I";
    case InputModel::kII:
      return "II";
    case InputModel::kIII:
      return "III";
    case InputModel::kIV:
      return "IV";
    case InputModel::kOnlineLp:
      return "lp";
    case InputModel::kWelfare:
      return "welfare";
  }
  return "unknown";
}

InputModel parse_input_model(std::string_view name) {
  if (name == "IV-synthetic") return InputModel::kIV;
  for (auto m : {InputModel::kI, InputModel::kII, InputModel::kIII, InputModel::kIV, InputModel::kOnlineLp,
                 InputModel::kWelfare}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown input model '" + std::string(name) + "'");
}

void InputModelSpec::validate() const {
  if (horizon < 1) throw std::invalid_argument("InputModelSpec: horizon must be >= 1");
  if (resources < 0 || decision_dim < 0) throw std::invalid_argument("InputModelSpec: negative dimension");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("InputModelSpec: kappa must be >= 0");
  if (!(entropy_mu_cap > 0.0)) throw std::invalid_argument("InputModelSpec: entropy_mu_cap must be > 0");
  if (!(huber_delta > 0.0)) throw std::invalid_argument("InputModelSpec: huber_delta must be > 0");
}

Instance synthetic_ads(const InputModelSpec& in) {
  in.validate();
  Rng rng(in.seed);
  Instance inst;
  ProblemSpec& s = inst.spec;
  s.horizon = in.horizon;
  s.resources = pick(in.resources, 5);
  s.decision_dim = s.resources;
  const int m = s.resources;
  s.avg_budget = uniform_vector(rng, m, 0.05, 0.2);
  const double total = s.avg_budget.sum();
  if (total > 1.0) s.avg_budget /= total;
  s.action_bound = 1.0;
  s.cost_bound = 1.0;
  s.reward_bound = 1.0;
  set_budget_bounds(s);
  if (in.kappa == 0.0) {
    inst.reg = Regularizer::none(m);
  } else {
    const double scale = s.avg_budget.sum();
    inst.reg = Regularizer::entropy(m, in.kappa, scale, in.entropy_mu_cap * in.kappa / scale);
    s.reg_bound = inst.reg.value_bound();
    s.grad_bound = inst.reg.grad_bound();
  }
  const Matrix eye = Matrix::Identity(m, m);
  inst.stream.reserve(in.horizon);
  for (int t = 0; t < in.horizon; ++t) {
    Vector q(m);
    for (int i = 0; i < m; ++i) q[i] = beta_draw(rng, 2.0, 8.0);
    inst.stream.push_back(Request{BundleSelect{std::move(q)}, eye});
  }
  return inst;
}

Instance generate(const InputModelSpec& in) {
  in.validate();
  Instance inst;
  switch (in.model) {
    case InputModel::kI:
      inst = model_one(in);
      break;
    case InputModel::kII:
      inst = model_two(in);
      break;
    case InputModel::kIII:
      inst = model_three(in);
      break;
    case InputModel::kIV:
      inst = synthetic_ads(in);
      break;
    case InputModel::kOnlineLp:
      inst = model_lp(in);
      break;
    case InputModel::kWelfare:
      inst = model_welfare(in);
      break;
  }
  if (in.regularizer && in.kappa > 0.0) {
    attach_regularizer(inst, *in.regularizer, in.kappa, in.huber_delta, in.entropy_mu_cap);
  }
  inst.spec.validate();
  return inst;
}

void attach_regularizer(Instance& inst, RegularizerKind kind, double kappa, double huber_delta,
                        double entropy_mu_cap) {
  ProblemSpec& s = inst.spec;
  const int m = s.resources;
  const double radius = s.consumption_radius();
  switch (kind) {
    case RegularizerKind::kNone:
      inst.reg = Regularizer::none(m);
      break;
    case RegularizerKind::kL2:
      inst.reg = Regularizer::l2(m, kappa, radius);
      break;
    case RegularizerKind::kSmoothMin:
      inst.reg = Regularizer::smooth_min(m, kappa, radius);
      break;
    case RegularizerKind::kSmoothMax:
      inst.reg = Regularizer::smooth_max(m, kappa, radius);
      break;
    case RegularizerKind::kEntropy: {
      const double scale = s.avg_budget.sum();
      inst.reg = Regularizer::entropy(m, kappa, scale, entropy_mu_cap * kappa / scale);
      break;
    }
    case RegularizerKind::kHuber:
      inst.reg = Regularizer::huber(m, kappa, huber_delta, std::max(radius, huber_delta));
      break;
  }
  s.reg_bound = inst.reg.pins_mu() ? 0.0 : inst.reg.value_bound();
  s.grad_bound = inst.reg.pins_mu() ? 0.0 : inst.reg.grad_bound();
}

double spectral_norm(const Matrix& b) {
  if (b.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(b);
  return svd.singularValues()[0];
}

}  // namespace oca
