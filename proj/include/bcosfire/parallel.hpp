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

#include <functional>

namespace bcosfire {

/// Runs body(begin, end) over contiguous chunks of [0, count) on up to
/// `threads` workers. threads <= 1 runs inline on the caller's thread.
void parallel_for(int count, int threads, const std::function<void(int, int)>& body);

} // namespace bcosfire
