/*
 * Copyright 2026 The Doris Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace doris {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data, bad config, shape mismatches. CLI exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Structured-output parse failures (annotation grammar, schema).
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Anything raised by an encoder or chat provider. CLI exit code 3.
class ProviderError : public Error {
 public:
  using Error::Error;
};

// Retries exhausted or a non-retryable HTTP status.
class TransportError : public ProviderError {
 public:
  TransportError(const std::string& what, int attempts)
      : ProviderError(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

// Prompt still exceeds the provider's character budget after truncation.
class ContextOverflowError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

}  // namespace doris
