#pragma once

#include <stdexcept>
#include <string>

namespace tihom {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Singular pattern matrix or unsupported dimension.
class RegularityError : public Error {
 public:
  using Error::Error;
};

/// Checked 64-bit lattice arithmetic overflowed.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// Array length or pattern does not match the owning lattice.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Request exceeds the size guard of a reference (dense) routine.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Parameter outside its mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Generator whose bracket sums vanish on some frequency class.
class DegenerateGeneratorError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a documented precondition between modules.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Dense system could not be solved.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent reference/field file.
class IngestionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tihom
