#pragma once

#include <stdexcept>
#include <string>

namespace qgphase {

/// Input outside an operation's mathematical domain (zero wavevector,
/// coincident centres, non-normalisable state, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A size or resource guard tripped (grid too large for direct quadrature,
/// propagator dimension above the dense-exponential limit).
class NumericalGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qgphase
