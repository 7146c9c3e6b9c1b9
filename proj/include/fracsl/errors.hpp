#pragma once

#include <stdexcept>
#include <string>

namespace fracsl {

/// Base of every error raised by the library. `name()` is the stable
/// identifier written into CLI reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* name() const noexcept { return "Error"; }
};

class DomainError : public Error {
 public:
  using Error::Error;
  const char* name() const noexcept override { return "DomainError"; }
};

/// Result magnitude exceeds the double range (large positive Mittag-Leffler
/// arguments).
class OverflowError : public DomainError {
 public:
  using DomainError::DomainError;
  const char* name() const noexcept override { return "Overflow"; }
};

class NonConvergence : public Error {
 public:
  using Error::Error;
  const char* name() const noexcept override { return "NonConvergence"; }
};

class NonFiniteSolution : public Error {
 public:
  using Error::Error;
  const char* name() const noexcept override { return "NonFiniteSolution"; }
};

/// A search could not reach a decision with the configured bounds.
class Inconclusive : public Error {
 public:
  using Error::Error;
  const char* name() const noexcept override { return "Inconclusive"; }
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::string token)
      : Error(message + " (token: '" + token + "')"), token_(std::move(token)) {}
  const char* name() const noexcept override { return "ParseError"; }
  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* name() const noexcept override { return "IoError"; }
};

}  // namespace fracsl
