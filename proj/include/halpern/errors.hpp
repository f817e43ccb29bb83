#pragma once

#include <stdexcept>
#include <string>

namespace halpern {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments: dimension mismatch, empty lists, malformed files.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A body or instance violates its construction invariants.
class InstanceError : public Error {
 public:
  using Error::Error;
};

/// An inner numerical solver failed to certify its answer.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// An operator was called outside its contract (e.g. CRM on a non-diagonal point).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// The reference-solution routes disagree.
class OracleError : public Error {
 public:
  using Error::Error;
};

}  // namespace halpern
