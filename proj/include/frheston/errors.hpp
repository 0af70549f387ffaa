#pragma once

#include <stdexcept>
#include <string>

namespace frh {

// Argument outside the domain of a mathematical function (e.g. Gamma at z <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed argument: bad sizes, unordered bounds, out-of-window tuning constants.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation requested in a regime (fractional / rough / classical) it does not support.
class RegimeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Riccati solution diverged before the requested horizon, so no affine value exists.
class BlowUpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace frh
