#include "pathlift/errors.hpp"

namespace pathlift {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::DanglingEdge: return "DanglingEdge";
    case ErrorKind::BadPoolArity: return "BadPoolArity";
    case ErrorKind::NonIdentityOutput: return "NonIdentityOutput";
    case ErrorKind::BadActivation: return "BadActivation";
    case ErrorKind::DuplicateNeuron: return "DuplicateNeuron";
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::UnknownNeuron: return "UnknownNeuron";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidParameters: return "InvalidParameters";
    case ErrorKind::PathExplosion: return "PathExplosion";
    case ErrorKind::NonPositiveFactor: return "NonPositiveFactor";
    case ErrorKind::IneligibleNeuron: return "IneligibleNeuron";
    case ErrorKind::DominanceUnverified: return "DominanceUnverified";
    case ErrorKind::RaggedLayers: return "RaggedLayers";
    case ErrorKind::SignConditionViolated: return "SignConditionViolated";
    case ErrorKind::MixedZeroCoordinate: return "MixedZeroCoordinate";
    case ErrorKind::MissingData: return "MissingData";
    case ErrorKind::InfeasibleAmount: return "InfeasibleAmount";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

PathExplosionError::PathExplosionError(std::uint64_t count, std::uint64_t cap)
    : Error(ErrorKind::PathExplosion,
            "network has " + std::to_string(count) + " paths, cap is " + std::to_string(cap)),
      count_(count),
      cap_(cap) {}

}  // namespace pathlift
