#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace domainuq {

enum class ErrorKind {
  NotPrime,
  DimensionZero,
  UnsupportedAlpha,
  LambdaOutOfRange,
  ThetaTooSmall,
  InvalidArgument,
  OrderCapExceeded,
  NonPositiveJacobian,
  DegenerateElement,
  SolverDivergence,
  NumericalOverflow,
  MeshMismatch,
  InsufficientPoints,
  Config,
  Io,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::NotPrime: return "NotPrime";
    case ErrorKind::DimensionZero: return "DimensionZero";
    case ErrorKind::UnsupportedAlpha: return "UnsupportedAlpha";
    case ErrorKind::LambdaOutOfRange: return "LambdaOutOfRange";
    case ErrorKind::ThetaTooSmall: return "ThetaTooSmall";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::OrderCapExceeded: return "OrderCapExceeded";
    case ErrorKind::NonPositiveJacobian: return "NonPositiveJacobian";
    case ErrorKind::DegenerateElement: return "DegenerateElement";
    case ErrorKind::SolverDivergence: return "SolverDivergence";
    case ErrorKind::NumericalOverflow: return "NumericalOverflow";
    case ErrorKind::MeshMismatch: return "MeshMismatch";
    case ErrorKind::InsufficientPoints: return "InsufficientPoints";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library. The kind is
/// stable and is what the CLI maps onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

  /// Usage/config problems as opposed to numerical breakdown.
  bool is_usage() const noexcept {
    switch (kind_) {
      case ErrorKind::NotPrime:
      case ErrorKind::DimensionZero:
      case ErrorKind::UnsupportedAlpha:
      case ErrorKind::LambdaOutOfRange:
      case ErrorKind::ThetaTooSmall:
      case ErrorKind::InvalidArgument:
      case ErrorKind::OrderCapExceeded:
      case ErrorKind::Config:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorKind kind_;
  std::string detail_;
};

/// A mapped triangle with non-positive signed area.
class DegenerateElementError : public Error {
 public:
  DegenerateElementError(std::size_t triangle, double signed_area, const std::string& context = {})
      : Error(ErrorKind::DegenerateElement,
              "triangle " + std::to_string(triangle) + " has signed area " +
                  std::to_string(signed_area) + (context.empty() ? "" : " (" + context + ")")),
        triangle_(triangle),
        signed_area_(signed_area) {}

  std::size_t triangle() const noexcept { return triangle_; }
  double signed_area() const noexcept { return signed_area_; }

 private:
  std::size_t triangle_;
  double signed_area_;
};

}  // namespace domainuq
