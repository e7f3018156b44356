#ifndef FJREC_ERROR_HPP_
#define FJREC_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fjrec {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  NonFinite,
  SingularMatrix,
  NotConverged,
  NotLambdaConnected,
  InvalidIndex,
  InputOutOfRange,
  TerminalInfeasible,
  QpFailure,
  GenerationFailed,
  IoError,
};

inline std::string_view to_string(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::NotLambdaConnected: return "NotLambdaConnected";
    case ErrorKind::InvalidIndex: return "InvalidIndex";
    case ErrorKind::InputOutOfRange: return "InputOutOfRange";
    case ErrorKind::TerminalInfeasible: return "TerminalInfeasible";
    case ErrorKind::QpFailure: return "QpFailure";
    case ErrorKind::GenerationFailed: return "GenerationFailed";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every hard failure in the library is raised as an Error carrying its kind.
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string & what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
  {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

}  // namespace fjrec

#endif  // FJREC_ERROR_HPP_
