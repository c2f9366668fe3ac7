/*
 * Copyright 2026 The miaudit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MIAUDIT_ERROR_HPP_
#define MIAUDIT_ERROR_HPP_

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace miaudit {

// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller-supplied data or configuration violates a documented contract.
// The CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A configuration is well-formed but not usable for the requested operation
// (for example an augmentation attack on a file without transform channels).
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Numerical domain violation (zero-norm vector, mismatched dimensions).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed MIAF / MIAN payload. `record_index()` is the first record that
// could not be decoded, or npos for header-level failures.
class DecodeError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  DecodeError(const std::string& what, std::size_t record_index = npos)
      : Error(what), record_index_(record_index) {}

  std::size_t record_index() const { return record_index_; }

 private:
  std::size_t record_index_;
};

// Threshold pseudo-labeling selected nothing; the weakly supervised attack
// cannot be trained without at least one pseudo-member.
class EmptySelectionError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace miaudit

#endif  // MIAUDIT_ERROR_HPP_
