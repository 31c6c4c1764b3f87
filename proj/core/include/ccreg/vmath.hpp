// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

namespace ccreg {

// Elementwise sine/cosine over contiguous arrays. Uses glibc's vector math
// library when available (a few ulp, deterministic for a given build), plain
// std::sin/std::cos otherwise. Output arrays may not alias the input.
void sin_array(const double* x, double* s, std::size_t n);
void sincos_array(const double* x, double* s, double* c, std::size_t n);

/// True when the vectorized path is compiled in.
bool vector_math_enabled() noexcept;

}  // namespace ccreg
