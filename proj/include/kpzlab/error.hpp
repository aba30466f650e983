// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace kpzlab {

// Values mirror kpz_status in kpzlab.h.
enum class ErrorCode {
  invalid_argument = 1,
  domain = 2,
  size = 3,
  convergence = 4,
  numeric = 5,
  io = 6,
  internal = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::invalid_argument, what);
}

}  // namespace kpzlab
