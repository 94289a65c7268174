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

#ifndef OCA_ERRORS_HPP_
#define OCA_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace oca {

/// A point lies outside the domain of the function it was passed to.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Gradient requested on the boundary of a domain where it is unbounded.
class BoundaryError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An inner iterative solver hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations, double residual)
      : std::runtime_error(what), iterations_(iterations), residual_(residual) {}

  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

}  // namespace oca

#endif  // OCA_ERRORS_HPP_
