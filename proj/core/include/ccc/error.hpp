#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or inconsistent configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A size exceeds what an accumulator mode can represent exactly.
class LimitError : public Error {
 public:
  using Error::Error;
};

/// Arithmetic that is undefined for the given data (e.g. no valid positions).
class DomainError : public Error {
 public:
  using Error::Error;
};

enum class FormatErrorKind { bad_magic, bad_version, truncated_payload, header_mismatch, io };

/// Packed dataset / record file problems.
class FormatError : public Error {
 public:
  FormatError(FormatErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  FormatErrorKind kind() const noexcept { return kind_; }

 private:
  FormatErrorKind kind_;
};

/// A simulated rank failed; the whole run was aborted.
class RunAborted : public Error {
 public:
  RunAborted(std::size_t rank, const std::string& what)
      : Error("rank " + std::to_string(rank) + ": " + what), rank_(rank) {}
  std::size_t rank() const noexcept { return rank_; }

 private:
  std::size_t rank_;
};

}  // namespace ccc
