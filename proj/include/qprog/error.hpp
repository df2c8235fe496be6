// Copyright 2026 The qprog Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QPROG_ERROR_HPP
#define QPROG_ERROR_HPP

#include <stdexcept>
#include <string>

namespace qprog {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or dimensions do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix expected to be Hermitian is not.
class SymmetryError : public Error {
 public:
  using Error::Error;
};

/// A scalar function is undefined on part of a spectrum, or a parameter is
/// out of range.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A requested object exceeds the configured size caps.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// An iterative method hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Invalid user input (configs, probabilities, state invariants).
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace qprog

#endif  // QPROG_ERROR_HPP
