#pragma once

#include <stdexcept>
#include <string>

namespace slq {

// Malformed or inconsistent configuration (dimension mismatch, parameter out of range).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A closed-form result was requested outside the region where its hypotheses hold.
class PreconditionError : public std::domain_error {
 public:
  explicit PreconditionError(const std::string& what) : std::domain_error(what) {}
};

// No distribution of the requested shape exists for the given moments and bound.
class InfeasibleError : public std::domain_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::domain_error(what) {}
};

// Dispatcher used outside its cycle protocol.
class StateError : public std::logic_error {
 public:
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

// Configuration would simulate an unstable system without explicit override.
class RefusalError : public std::runtime_error {
 public:
  explicit RefusalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace slq
