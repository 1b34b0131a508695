// Copyright 2026 The emosim Authors
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

#ifndef EMO_ERRORS_HPP
#define EMO_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emo {

/// Bad input: unknown labels, out-of-range indices, malformed configs.
/// The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed (non-convergence, singular fit, ...).
/// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Linear ion configuration is not a minimum of the potential.
class InstabilityError : public NumericalError {
   public:
    using NumericalError::NumericalError;
};

/// Parity fit could not be performed (rank-deficient design).
class FitError : public NumericalError {
   public:
    using NumericalError::NumericalError;
};

/// A density matrix left the physical set during sequence execution.
class InvariantViolation : public NumericalError {
   public:
    InvariantViolation(std::size_t step_index, const std::string &what)
        : NumericalError("step " + std::to_string(step_index) + ": " + what), step_index_(step_index) {
    }
    std::size_t step_index() const noexcept {
        return step_index_;
    }

   private:
    std::size_t step_index_;
};

}  // namespace emo

#endif
