#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pathlift {

enum class ErrorKind {
  CycleDetected,
  DanglingEdge,
  BadPoolArity,
  NonIdentityOutput,
  BadActivation,
  DuplicateNeuron,
  DuplicateEdge,
  UnknownNeuron,
  DimensionMismatch,
  InvalidParameters,
  PathExplosion,
  NonPositiveFactor,
  IneligibleNeuron,
  DominanceUnverified,
  RaggedLayers,
  SignConditionViolated,
  MixedZeroCoordinate,
  MissingData,
  InfeasibleAmount,
  InvalidConfig,
  ParseError,
};

std::string_view to_string(ErrorKind kind);

// All domain failures surface as this exception; kind() identifies the
// contract that was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class PathExplosionError : public Error {
 public:
  PathExplosionError(std::uint64_t count, std::uint64_t cap);

  // Saturates at UINT64_MAX.
  std::uint64_t count() const noexcept { return count_; }
  std::uint64_t cap() const noexcept { return cap_; }

 private:
  std::uint64_t count_;
  std::uint64_t cap_;
};

}  // namespace pathlift
