#pragma once

#include <stdexcept>
#include <string>

namespace nilcube {

enum class ErrorKind {
  InvalidArgument,
  InvalidCodimension,
  DimensionMismatch,
  UnsupportedCarrier,
  GroupMismatch,
  NotASubgroup,
  WindowViolation,
  MixedFiniteComponents,
  NotANilspace,
  StructureExtraction,
  CapExceeded,
  PartialResult,
  NotBijective,
  NotAFactorCube,
  NotABundleMap,
  RepresentativeDependence,
  HKMembership,
  SmallnessBudgetExceeded,
  InternalInvariant,
  Precondition,
  Parse,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nilcube
