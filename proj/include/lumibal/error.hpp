#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lumibal {

enum class ErrorCode {
  kIngestion,
  kConflict,
  kReference,
  kIntegrity,
  kRange,
  kEmptyRegion,
  kDegenerate,
  kInsufficient,
  kIo,
  kConfig,
};

// Stable machine-parsable token, e.g. "E_REFERENCE".
std::string_view error_token(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lumibal
