// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <exception>
#include <stdexcept>
#include <string>
#include <vector>

namespace conke {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied something that violates a precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t epoch, const std::string& what)
      : Error(what), epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

// A linear system the editors need to solve is (numerically) singular.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Non-finite vectors where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Two codebook entries with different targets share a key.
class ConflictError : public Error {
 public:
  using Error::Error;
};

// A remote backend answered, but not in the agreed format.
class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& what, std::string raw = {})
      : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

// A remote backend could not be reached, or kept failing after retries.
class BackendError : public Error {
 public:
  using Error::Error;
};

// Referential integrity of a store or snapshot is broken.
class IntegrityError : public Error {
 public:
  IntegrityError(const std::string& what, std::vector<std::string> dangling = {})
      : Error(what), dangling_(std::move(dangling)) {}
  const std::vector<std::string>& dangling_ids() const { return dangling_; }

 private:
  std::vector<std::string> dangling_;
};

// Persisted file has the wrong version or shape.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Wraps an error raised inside one pipeline stage. The original exception is
// kept so callers can still dispatch on its type.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what,
             std::exception_ptr cause = nullptr)
      : Error(stage + ": " + what), stage_(std::move(stage)), cause_(cause) {}
  const std::string& stage() const { return stage_; }
  std::exception_ptr cause() const { return cause_; }

 private:
  std::string stage_;
  std::exception_ptr cause_;
};

}  // namespace conke
