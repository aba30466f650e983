// SPDX-License-Identifier: Apache-2.0
#pragma once

#if defined(__SSE2__)
#include <pmmintrin.h>
#include <xmmintrin.h>
#endif

namespace kpzlab::detail {

// Flush denormals while a kernel runs. Values that small sit far below the
// scale of the field and never affect a result.
class DenormalGuard {
 public:
  DenormalGuard() {
#if defined(__SSE2__)
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | 0x8040);
#endif
  }
  ~DenormalGuard() {
#if defined(__SSE2__)
    _mm_setcsr(saved_);
#endif
  }
  DenormalGuard(const DenormalGuard&) = delete;
  DenormalGuard& operator=(const DenormalGuard&) = delete;

 private:
  unsigned saved_ = 0;
};

}  // namespace kpzlab::detail
