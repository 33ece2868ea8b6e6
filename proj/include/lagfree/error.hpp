#ifndef LAGFREE_ERROR_HPP
#define LAGFREE_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace lagfree {

enum class ErrorCode {
  DegenerateFrame,
  InvalidParameter,
  InvalidCollar,
  InvalidLoop,
  NotUnitary,
  NotCoprime,
  NotOnBoundary,
  ProjectionDiverged,
  Unsupported,
  DegenerateNormal,
  FlowNotInvertible,
  TubeTooLarge,
  InconsistentAngle,
  NotUnitModulus,
  InadmissibleHamiltonian,
  SupportViolation,
  DegeneratePointCloud,
  LineSearchStalled,
  Config,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateFrame: return "DegenerateFrame";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidCollar: return "InvalidCollar";
    case ErrorCode::InvalidLoop: return "InvalidLoop";
    case ErrorCode::NotUnitary: return "NotUnitary";
    case ErrorCode::NotCoprime: return "NotCoprime";
    case ErrorCode::NotOnBoundary: return "NotOnBoundary";
    case ErrorCode::ProjectionDiverged: return "ProjectionDiverged";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::DegenerateNormal: return "DegenerateNormal";
    case ErrorCode::FlowNotInvertible: return "FlowNotInvertible";
    case ErrorCode::TubeTooLarge: return "TubeTooLarge";
    case ErrorCode::InconsistentAngle: return "InconsistentAngle";
    case ErrorCode::NotUnitModulus: return "NotUnitModulus";
    case ErrorCode::InadmissibleHamiltonian: return "InadmissibleHamiltonian";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::DegeneratePointCloud: return "DegeneratePointCloud";
    case ErrorCode::LineSearchStalled: return "LineSearchStalled";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace lagfree

#endif  // LAGFREE_ERROR_HPP
