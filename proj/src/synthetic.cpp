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

#include "bcosfire/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace bcosfire {

namespace {

bool inside(const BarSpec& bar, double px, double py) {
  // Image coordinates to y-up offsets from the bar center.
  const double dx = px - bar.cx;
  const double dy = bar.cy - py;
  const double ux = std::cos(bar.angle);
  const double uy = std::sin(bar.angle);
  const double along = dx * ux + dy * uy;
  const double across = std::fabs(dx * uy - dy * ux);
  if (across > bar.width / 2.0) {
    return false;
  }
  if (bar.half && along < 0.0) {
    return false;
  }
  if (bar.length > 0.0) {
    return bar.half ? along <= bar.length : std::fabs(along) <= bar.length / 2.0;
  }
  return true;
}

} // namespace

GrayImage bar_coverage(int width, int height, std::span<const BarSpec> bars, int supersample) {
  GrayImage out(width, height);
  const int n = std::max(supersample, 1);
  const double cells = static_cast<double>(n) * n;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      int hits = 0;
      for (int sy = 0; sy < n; ++sy) {
        for (int sx = 0; sx < n; ++sx) {
          const double px = x - 0.5 + (sx + 0.5) / n;
          const double py = y - 0.5 + (sy + 0.5) / n;
          for (const BarSpec& b : bars) {
            if (inside(b, px, py)) {
              ++hits;
              break;
            }
          }
        }
      }
      out(x, y) = hits / cells;
    }
  }
  return out;
}

GrayImage render_bars(int width, int height, std::span<const BarSpec> bars, double foreground, double background,
                      int supersample) {
  GrayImage img = bar_coverage(width, height, bars, supersample);
  for (double& v : img.pixels()) {
    v = background - (background - foreground) * v;
  }
  return img;
}

GrayImage bar_prototype(int size, double bar_width, bool half) {
  const double c = (size - 1) / 2.0;
  const BarSpec bar{c, c, std::numbers::pi / 2.0, bar_width, half, 0.0};
  return render_bars(size, size, std::span(&bar, 1));
}

Sample synthetic_vessel_sample(int size, std::uint64_t seed, int lines, double noise) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.2 * size, 0.8 * size);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::uniform_real_distribution<double> width(2.0, 5.0);
  std::normal_distribution<double> jitter(0.0, noise);
  std::vector<BarSpec> bars;
  for (int i = 0; i < lines; ++i) {
    bars.push_back({pos(rng), pos(rng), angle(rng), width(rng), false, 0.0});
  }
  const GrayImage coverage = bar_coverage(size, size, bars);
  Sample s;
  s.name = "synthetic_" + std::to_string(seed);
  s.image = GrayImage(size, size);
  s.gt = GrayImage(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double c = coverage(x, y);
      s.image(x, y) = std::clamp(0.8 - 0.5 * c + jitter(rng), 0.0, 1.0);
      s.gt(x, y) = c > 0.5 ? 1.0 : 0.0;
    }
  }
  s.mask = Mask::full(size, size);
  return s;
}

} // namespace bcosfire
