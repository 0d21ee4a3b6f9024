#pragma once

#include <stdexcept>
#include <string>

namespace clhoi {

enum class ErrorKind {
  kDimension,
  kDomain,
  kUsage,
  kNumeric,
  kDeterminism,
  kConfig,
  kState,
  kSampling,
  kGeneration,
  kGeometry,
  kRange,
  kIo,
  kParse,
  kLoad,
  kData,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library; the kind drives C API status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace clhoi
