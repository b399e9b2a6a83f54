#pragma once

#include <stdexcept>
#include <string>

namespace flowdep {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or unwritable file, or a file whose content cannot be decoded.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Configuration or precondition violated by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Lookup of an address that is not part of the indexed vertex set.
class UnknownAddressError : public Error {
 public:
  explicit UnknownAddressError(const std::string& address)
      : Error("unknown address: " + address), address_(address) {}

  const std::string& address() const noexcept { return address_; }

 private:
  std::string address_;
};

/// A randomized procedure gave up after its retry budget.
class ExhaustedError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure during model training.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace flowdep
