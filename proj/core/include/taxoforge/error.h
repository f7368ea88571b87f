// Copyright 2026 The TaxoForge Authors.
//
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

#ifndef TAXOFORGE_ERROR_H_
#define TAXOFORGE_ERROR_H_

#include <stdexcept>
#include <string>

namespace taxoforge {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or schema-violating corpus input.
class CorpusError : public Error {
 public:
  using Error::Error;
};

// A caller violated a documented precondition or passed an out-of-range
// parameter.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Unknown word or term looked up against corpus statistics.
class UnknownWordError : public Error {
 public:
  using Error::Error;
};

// NaN/inf in an iterative computation, or a degenerate numeric input.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// SMO did not reach the KKT tolerance within its iteration budget.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double kkt_violation)
      : NumericalError(what), kkt_violation_(kkt_violation) {}
  double kkt_violation() const { return kkt_violation_; }

 private:
  double kkt_violation_;
};

// Probability calibration could not be fitted (single-class fold,
// constant decision values).
class CalibrationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Bad serialized artifact (similarity matrix, model, taxonomy, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace taxoforge

#endif  // TAXOFORGE_ERROR_H_
