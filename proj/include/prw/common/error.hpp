#pragma once

#include <stdexcept>
#include <string>

namespace prw {

// Bad input values (non-finite state, out-of-range arguments, malformed files).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Caller violated a shape or precondition contract.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Argument outside its admissible interval.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Misconfigured experiment, plan, or model.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf produced during computation.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Contact penetration exceeded the hard cap; the time step is too large.
class TunnelingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Artifact hashes do not form a consistent chain.
class ProvenanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace prw
