#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oogrisk {

enum class ErrorCode {
  InvalidModel,
  DimensionMismatch,
  NotPSD,
  NotPD,
  UnstableClosedLoop,
  RankDeficientInput,
  DegeneratePencil,
  SyntaxError,
  UnknownParameter,
  DivisionByZero,
  UnboundIdentifier,
  ParameterOutOfRange,
  InvalidGuaranteeParams,
  InvalidSupport,
  GridArityMismatch,
  MixedAttackDimensions,
  HorizonTooShort,
  CapExceeded,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `path()` names the offending field
/// (e.g. "plant.A[1][2]") when the error originates from configuration data.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string path = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }

 private:
  ErrorCode code_;
  std::string path_;
};

}  // namespace oogrisk
