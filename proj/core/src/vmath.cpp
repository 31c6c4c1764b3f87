// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include "ccreg/vmath.hpp"

#include <cmath>

#if defined(CCREG_HAVE_LIBMVEC) && defined(__x86_64__) && (defined(__AVX512F__) || defined(__AVX2__))
#include <immintrin.h>
#define CCREG_VMATH 1
#endif

#ifdef CCREG_VMATH
// libmvec entry points (x86_64 vector function ABI).
extern "C" {
#if defined(__AVX512F__)
__m512d _ZGVeN8v_sin(__m512d);
__m512d _ZGVeN8v_cos(__m512d);
#else
__m256d _ZGVdN4v_sin(__m256d);
__m256d _ZGVdN4v_cos(__m256d);
#endif
}
#endif

namespace ccreg {
namespace {

#ifdef CCREG_VMATH
#if defined(__AVX512F__)
constexpr std::size_t kLanes = 8;
inline void vsin(const double* x, double* s) { _mm512_storeu_pd(s, _ZGVeN8v_sin(_mm512_loadu_pd(x))); }
inline void vcos(const double* x, double* c) { _mm512_storeu_pd(c, _ZGVeN8v_cos(_mm512_loadu_pd(x))); }
#else
constexpr std::size_t kLanes = 4;
inline void vsin(const double* x, double* s) { _mm256_storeu_pd(s, _ZGVdN4v_sin(_mm256_loadu_pd(x))); }
inline void vcos(const double* x, double* c) { _mm256_storeu_pd(c, _ZGVdN4v_cos(_mm256_loadu_pd(x))); }
#endif
#endif

}  // namespace

void sin_array(const double* x, double* s, std::size_t n) {
  std::size_t i = 0;
#ifdef CCREG_VMATH
  for (; i + kLanes <= n; i += kLanes) vsin(x + i, s + i);
  if (i < n) {
    // Pad the tail so every element goes through the same implementation.
    double xin[kLanes] = {}, out[kLanes];
    for (std::size_t j = i; j < n; ++j) xin[j - i] = x[j];
    vsin(xin, out);
    for (std::size_t j = i; j < n; ++j) s[j] = out[j - i];
    return;
  }
#endif
  for (; i < n; ++i) s[i] = std::sin(x[i]);
}

void sincos_array(const double* x, double* s, double* c, std::size_t n) {
  std::size_t i = 0;
#ifdef CCREG_VMATH
  for (; i + kLanes <= n; i += kLanes) {
    vsin(x + i, s + i);
    vcos(x + i, c + i);
  }
  if (i < n) {
    double xin[kLanes] = {}, so[kLanes], co[kLanes];
    for (std::size_t j = i; j < n; ++j) xin[j - i] = x[j];
    vsin(xin, so);
    vcos(xin, co);
    for (std::size_t j = i; j < n; ++j) {
      s[j] = so[j - i];
      c[j] = co[j - i];
    }
    return;
  }
#endif
  for (; i < n; ++i) {
    s[i] = std::sin(x[i]);
    c[i] = std::cos(x[i]);
  }
}

bool vector_math_enabled() noexcept {
#ifdef CCREG_VMATH
  return true;
#else
  return false;
#endif
}

}  // namespace ccreg
