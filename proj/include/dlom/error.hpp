#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

namespace dlom {

enum class ErrorKind {
  kInvalidInput,
  kInvalidPopulation,
  kDivisionDomain,
  kInsufficientData,
  kValidation,
  kNotFound,
  kConflict,
  kSyntax,
  kUnknownField,
  kTypeMismatch,
  kProtocol,
  kUnsupportedMethod,
  kIo,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid_input";
    case ErrorKind::kInvalidPopulation: return "invalid_population";
    case ErrorKind::kDivisionDomain: return "division_domain";
    case ErrorKind::kInsufficientData: return "insufficient_data";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kNotFound: return "not_found";
    case ErrorKind::kConflict: return "conflict";
    case ErrorKind::kSyntax: return "syntax";
    case ErrorKind::kUnknownField: return "unknown_field";
    case ErrorKind::kTypeMismatch: return "type_mismatch";
    case ErrorKind::kProtocol: return "protocol";
    case ErrorKind::kUnsupportedMethod: return "unsupported_method";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

// Every failure raised by the library. `detail` carries structured context
// (parse position, violation list, session state) for API consumers.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message,
        nlohmann::ordered_json detail = nullptr)
      : std::runtime_error(std::move(message)),
        kind_(kind),
        detail_(std::move(detail)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const nlohmann::ordered_json& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  nlohmann::ordered_json detail_;
};

}  // namespace dlom
