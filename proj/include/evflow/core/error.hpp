#pragma once

#include <stdexcept>
#include <string>

namespace evflow {

enum class ErrorCode {
  kInvalidWindow,
  kRange,
  kFormat,
  kCorruptFile,
  kShape,
  kConfig,
  kGenerationFailure,
  kAlignment,
  kPathologicalMotion,
  kPackaging,
  kIo,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace evflow
