#pragma once

#include <stdexcept>
#include <string>

namespace rdiff {

/// Failure categories shared by the C++ core and the C API.
enum class ErrorCode {
  InvalidArgument = 1,  // precondition on an input violated
  Domain = 2,           // argument outside the regime where a bound applies
  Numeric = 3,          // quadrature / refinement did not converge
  Io = 4,
  Config = 5,
  Internal = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace rdiff
