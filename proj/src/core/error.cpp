#include "core/error.hpp"

namespace clhoi {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return "dimension error";
    case ErrorKind::kDomain: return "domain error";
    case ErrorKind::kUsage: return "usage error";
    case ErrorKind::kNumeric: return "numeric error";
    case ErrorKind::kDeterminism: return "determinism error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kState: return "state error";
    case ErrorKind::kSampling: return "sampling error";
    case ErrorKind::kGeneration: return "generation error";
    case ErrorKind::kGeometry: return "degenerate geometry";
    case ErrorKind::kRange: return "range error";
    case ErrorKind::kIo: return "io error";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kLoad: return "load error";
    case ErrorKind::kData: return "data error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace clhoi
