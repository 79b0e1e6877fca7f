#include "evflow/core/error.hpp"

namespace evflow {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidWindow: return "invalid-window";
    case ErrorCode::kRange: return "range";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kCorruptFile: return "corrupt-file";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kGenerationFailure: return "generation-failure";
    case ErrorCode::kAlignment: return "alignment";
    case ErrorCode::kPathologicalMotion: return "pathological-motion";
    case ErrorCode::kPackaging: return "packaging";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace evflow
