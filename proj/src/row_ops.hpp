/*
 *  Copyright 2026 The bcosfire Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#pragma once

// Hot inner loops, compiled for AVX2 and a baseline target and dispatched at
// load time. FMA is not enabled, so both versions round identically.

namespace bcosfire::detail {

#if defined(__GNUC__) && defined(__x86_64__) && !defined(__clang__)
#define BCOSFIRE_ROW_TARGETS __attribute__((target_clones("avx2", "default")))
#else
#define BCOSFIRE_ROW_TARGETS
#endif

// dst[x] = max(dst[x], src[x] * g)
[[maybe_unused]] BCOSFIRE_ROW_TARGETS static void scaled_max_into(double* __restrict dst, const double* __restrict src, double g, int n) {
  for (int x = 0; x < n; ++x) {
    const double v = src[x] * g;
    dst[x] = dst[x] < v ? v : dst[x];
  }
}

// dst[x] += src[x] * k
[[maybe_unused]] BCOSFIRE_ROW_TARGETS static void scaled_add_into(double* __restrict dst, const double* __restrict src, double k, int n) {
  for (int x = 0; x < n; ++x) {
    dst[x] += src[x] * k;
  }
}

} // namespace bcosfire::detail
