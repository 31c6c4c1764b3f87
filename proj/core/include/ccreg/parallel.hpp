// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace ccreg {

/// Worker count for in-process parallel loops: CCREG_THREADS if set (>= 1),
/// otherwise the hardware concurrency.
unsigned worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Each index is
/// processed exactly once; callers own any reduction and must perform it in
/// index order afterwards so results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Keeps large temporary buffers on the heap instead of returning them to the
/// kernel after every free (glibc only; a no-op elsewhere). Training allocates
/// and drops multi-megabyte activation buffers each epoch, and the default
/// mmap threshold turns each of those into page faults. Call once at startup.
void tune_allocator() noexcept;

}  // namespace ccreg
