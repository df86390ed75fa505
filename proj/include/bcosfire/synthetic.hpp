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

#include <cstdint>
#include <span>

#include "bcosfire/image.hpp"
#include "bcosfire/tune.hpp"

namespace bcosfire {

/// A straight dark bar on a bright background. `angle` is the direction of
/// the bar axis, counter-clockwise from +x with y pointing up, so a vertical
/// bar has angle pi/2. A half bar starts at the center and extends along
/// +angle only.
struct BarSpec {
  double cx = 0.0;
  double cy = 0.0;
  double angle = 1.5707963267948966;
  double width = 3.0;
  bool half = false;
  double length = 0.0; ///< <= 0 means unbounded
};

/// Per-pixel bar coverage in [0,1], estimated on a supersample x supersample grid.
GrayImage bar_coverage(int width, int height, std::span<const BarSpec> bars, int supersample = 4);

/// background - (background - foreground) * coverage
GrayImage render_bars(int width, int height, std::span<const BarSpec> bars, double foreground = 0.0,
                      double background = 1.0, int supersample = 4);

/// Vertical bar prototype centered in a size x size image.
GrayImage bar_prototype(int size, double bar_width, bool half);

/// Random dark line network with additive noise; ground truth marks pixels
/// whose coverage exceeds one half. Deterministic in `seed`.
Sample synthetic_vessel_sample(int size, std::uint64_t seed, int lines = 6, double noise = 0.03);

} // namespace bcosfire
