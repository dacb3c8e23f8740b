#pragma once

#include <stdexcept>
#include <string>

namespace dmpc {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter or configuration violates a documented constraint; raised
// before any computation starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A circuit width or arithmetic range does not fit the requested construction.
class WidthError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Malformed serialized data (circuit text, garbled blobs, keys, frames).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Homomorphic decryption failed: the noise budget is exhausted.
class DecryptionFailure : public Error {
 public:
  using Error::Error;
};

// A homomorphic operation would exhaust the estimated noise budget.
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

// The LD statistic is undefined (a zero margin).
class UndefinedStatistic : public Error {
 public:
  using Error::Error;
};

// A protocol role received a message that violates the choreography.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Connection loss or malformed framing at the transport layer.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace dmpc
