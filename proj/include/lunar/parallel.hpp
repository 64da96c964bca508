// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstddef>
#include <functional>

namespace lunar {

// Calls fn(i) for i in [0, n) on up to `threads` workers. Each index is handled
// exactly once; callers write results by index so output order never depends
// on scheduling. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

// Worker count from LUNAR_LAB_THREADS, or `fallback` when unset or invalid.
std::size_t threads_from_env(std::size_t fallback);

}  // namespace lunar
