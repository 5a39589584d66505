#include "oogrisk/error.hpp"

namespace oogrisk {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::NotPD: return "NotPD";
    case ErrorCode::UnstableClosedLoop: return "UnstableClosedLoop";
    case ErrorCode::RankDeficientInput: return "RankDeficientInput";
    case ErrorCode::DegeneratePencil: return "DegeneratePencil";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownParameter: return "UnknownParameter";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::UnboundIdentifier: return "UnboundIdentifier";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::InvalidGuaranteeParams: return "InvalidGuaranteeParams";
    case ErrorCode::InvalidSupport: return "InvalidSupport";
    case ErrorCode::GridArityMismatch: return "GridArityMismatch";
    case ErrorCode::MixedAttackDimensions: return "MixedAttackDimensions";
    case ErrorCode::HorizonTooShort: return "HorizonTooShort";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {
std::string compose(ErrorCode code, const std::string& message, const std::string& path) {
  std::string out{to_string(code)};
  if (!path.empty()) out += " at " + path;
  out += ": " + message;
  return out;
}
}  // namespace

Error::Error(ErrorCode code, std::string message, std::string path)
    : std::runtime_error(compose(code, message, path)), code_(code), path_(std::move(path)) {}

}  // namespace oogrisk
