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

#include "bcosfire/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "bcosfire/error.hpp"
#include "bcosfire/parallel.hpp"

namespace bcosfire {

namespace {

constexpr int kBins = 256;

int to_bin(double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * (kBins - 1))); }

struct TileGrid {
  int tiles_x, tiles_y;
  int width, height;

  int x_begin(int tx) const { return static_cast<int>(static_cast<long long>(tx) * width / tiles_x); }
  int y_begin(int ty) const { return static_cast<int>(static_cast<long long>(ty) * height / tiles_y); }
  double x_center(int tx) const { return 0.5 * (x_begin(tx) + x_begin(tx + 1) - 1); }
  double y_center(int ty) const { return 0.5 * (y_begin(ty) + y_begin(ty + 1) - 1); }
};

using Mapping = std::array<double, kBins>;

Mapping tile_mapping(const GrayImage& gray, int x0, int x1, int y0, int y1, double clip_limit) {
  std::array<double, kBins> hist{};
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      hist[static_cast<std::size_t>(to_bin(gray(x, y)))] += 1.0;
    }
  }
  Mapping map{};
  const double total = static_cast<double>(x1 - x0) * (y1 - y0);
  const auto occupied = std::count_if(hist.begin(), hist.end(), [](double h) { return h > 0.0; });
  if (total <= 0.0 || occupied <= 1) {
    for (int b = 0; b < kBins; ++b) {
      map[static_cast<std::size_t>(b)] = static_cast<double>(b) / (kBins - 1);
    }
    return map;
  }

  const double mean_bin = total / kBins;
  const double ceiling = mean_bin + clip_limit * (total - mean_bin);
  double excess = 0.0;
  for (double& h : hist) {
    if (h > ceiling) {
      excess += h - ceiling;
      h = ceiling;
    }
  }
  const double share = excess / kBins;

  double cdf = 0.0;
  for (int b = 0; b < kBins; ++b) {
    cdf += hist[static_cast<std::size_t>(b)] + share;
    map[static_cast<std::size_t>(b)] = std::min(cdf / total, 1.0);
  }
  return map;
}

// Index of the tile center at or left of `pos`, and the fractional weight of
// the next center.
std::pair<int, double> bracket(double pos, int tiles, auto center) {
  if (pos <= center(0)) {
    return {0, 0.0};
  }
  if (pos >= center(tiles - 1)) {
    return {tiles - 1, 0.0};
  }
  int t = 0;
  while (t + 1 < tiles && center(t + 1) <= pos) {
    ++t;
  }
  const double c0 = center(t);
  const double c1 = center(t + 1);
  return {t, (pos - c0) / (c1 - c0)};
}

} // namespace

GrayImage extract_green(const RgbImage& rgb) {
  GrayImage out(rgb.width(), rgb.height());
  const auto& g = rgb.green();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < g.size(); ++i) {
    dst[i] = g[i] / 255.0;
  }
  return out;
}

GrayImage smooth_fov_border(const GrayImage& gray, const Mask& mask, int iterations) {
  if (!mask.same_shape(gray)) {
    throw DimensionMismatch("FOV mask is " + std::to_string(mask.width()) + "x" + std::to_string(mask.height()) +
                            " but image is " + std::to_string(gray.width()) + "x" + std::to_string(gray.height()));
  }
  if (iterations < 0) {
    throw InvalidParameter("smoothing iterations must be >= 0");
  }
  const int w = gray.width();
  const int h = gray.height();
  GrayImage out = gray;
  std::vector<std::uint8_t> filled(mask.pixels().begin(), mask.pixels().end());
  auto at = [w](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x); };

  for (int it = 0; it < iterations; ++it) {
    std::vector<std::pair<std::size_t, double>> ring;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (filled[at(x, y)]) {
          continue;
        }
        double sum = 0.0;
        int n = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx;
            const int ny = y + dy;
            if ((dx || dy) && nx >= 0 && ny >= 0 && nx < w && ny < h && filled[at(nx, ny)]) {
              sum += out(nx, ny);
              ++n;
            }
          }
        }
        if (n > 0) {
          ring.emplace_back(at(x, y), sum / n);
        }
      }
    }
    if (ring.empty()) {
      break;
    }
    auto dst = out.pixels();
    for (const auto& [i, value] : ring) {
      dst[i] = value;
      filled[i] = 1;
    }
  }
  return out;
}

GrayImage clahe(const GrayImage& gray, int tiles_x, int tiles_y, double clip_limit, int threads) {
  if (tiles_x < 1 || tiles_y < 1) {
    throw InvalidParameter("CLAHE needs at least one tile per axis");
  }
  if (!(clip_limit > 0.0 && clip_limit <= 1.0)) {
    throw InvalidParameter("CLAHE clip limit must lie in (0, 1], got " + std::to_string(clip_limit));
  }
  if (gray.empty()) {
    throw InvalidParameter("image is empty");
  }
  const TileGrid grid{std::min(tiles_x, gray.width()), std::min(tiles_y, gray.height()), gray.width(), gray.height()};

  std::vector<Mapping> maps(static_cast<std::size_t>(grid.tiles_x * grid.tiles_y));
  parallel_for(grid.tiles_x * grid.tiles_y, threads, [&](int t0, int t1) {
    for (int t = t0; t < t1; ++t) {
      const int tx = t % grid.tiles_x;
      const int ty = t / grid.tiles_x;
      maps[static_cast<std::size_t>(t)] = tile_mapping(gray, grid.x_begin(tx), grid.x_begin(tx + 1), grid.y_begin(ty),
                                                       grid.y_begin(ty + 1), clip_limit);
    }
  });
  auto map_at = [&](int tx, int ty) -> const Mapping& { return maps[static_cast<std::size_t>(ty * grid.tiles_x + tx)]; };
  auto xc = [&](int t) { return grid.x_center(t); };
  auto yc = [&](int t) { return grid.y_center(t); };

  GrayImage out(gray.width(), gray.height());
  parallel_for(gray.height(), threads, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      const auto [ty, fy] = bracket(y, grid.tiles_y, yc);
      const int ty1 = std::min(ty + 1, grid.tiles_y - 1);
      for (int x = 0; x < gray.width(); ++x) {
        const auto [tx, fx] = bracket(x, grid.tiles_x, xc);
        const int tx1 = std::min(tx + 1, grid.tiles_x - 1);
        const auto b = static_cast<std::size_t>(to_bin(gray(x, y)));
        const double m00 = map_at(tx, ty)[b];
        const double m10 = map_at(tx1, ty)[b];
        const double m01 = map_at(tx, ty1)[b];
        const double m11 = map_at(tx1, ty1)[b];
        const double top = fx == 0.0 ? m00 : m00 + (m10 - m00) * fx;
        const double bottom = fx == 0.0 ? m01 : m01 + (m11 - m01) * fx;
        const double v = fy == 0.0 ? top : top + (bottom - top) * fy;
        out(x, y) = std::clamp(v, 0.0, 1.0);
      }
    }
  });
  return out;
}

GrayImage preprocess(const GrayImage& gray, const Mask& fov, const PreprocessOptions& options, int threads) {
  const GrayImage smoothed = smooth_fov_border(gray, fov, options.smooth_iterations);
  return clahe(smoothed, options.clahe_tiles_x, options.clahe_tiles_y, options.clahe_clip, threads);
}

GrayImage preprocess(const RgbImage& rgb, const Mask& fov, const PreprocessOptions& options, int threads) {
  return preprocess(extract_green(rgb), fov, options, threads);
}

} // namespace bcosfire
