#pragma once

#include <stdexcept>
#include <string>

namespace arp {

/// Bad input: dimension mismatch, non-finite data, inconsistent configuration.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A problem was asked for a derivative order it does not provide.
class UnsupportedOrder : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A diagnostic needs a problem constant (L, f_low) that is not available.
class UnsupportedCheck : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal guarantee did not hold (e.g. no descent along a descent direction).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace arp
