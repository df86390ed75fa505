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

#include "bcosfire/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bcosfire/error.hpp"
#include "bcosfire/parallel.hpp"
#include "row_ops.hpp"

namespace bcosfire {

namespace {

void require_sigma(double sigma, const char* name) {
  if (!std::isfinite(sigma) || sigma <= 0.0) {
    throw InvalidParameter(std::string(name) + " must be positive and finite, got " + std::to_string(sigma));
  }
}

void require_image(const GrayImage& image) {
  if (image.empty()) {
    throw InvalidParameter("image is empty");
  }
}

// Unit-mass 1-D Gaussian sampled on [-radius, radius].
std::vector<double> gaussian_1d(double sigma, int radius) {
  std::vector<double> g(static_cast<std::size_t>(2 * radius + 1));
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma);
  for (int i = -radius; i <= radius; ++i) {
    g[static_cast<std::size_t>(i + radius)] = norm * std::exp(-(i * i) / (2.0 * sigma * sigma));
  }
  return g;
}

// Convolve rows then columns with a 1-D kernel, edge replicated.
GrayImage convolve_separable(const GrayImage& image, const std::vector<double>& k, int threads) {
  const int w = image.width();
  const int h = image.height();
  const int r = static_cast<int>(k.size() / 2);
  GrayImage tmp(w, h);
  parallel_for(h, threads, [&](int y0, int y1) {
    std::vector<double> padded(static_cast<std::size_t>(w + 2 * r));
    for (int y = y0; y < y1; ++y) {
      auto src = image.row(y);
      for (int i = 0; i < w + 2 * r; ++i) {
        padded[static_cast<std::size_t>(i)] = src[static_cast<std::size_t>(std::clamp(i - r, 0, w - 1))];
      }
      double* __restrict dst = tmp.row(y).data();
      for (int u = -r; u <= r; ++u) {
        const double ku = k[static_cast<std::size_t>(u + r)];
        const double* __restrict shifted = padded.data() + r - u;
        detail::scaled_add_into(dst, shifted, ku, w);
      }
    }
  });
  GrayImage out(w, h);
  parallel_for(h, threads, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      auto dst = out.row(y);
      for (int v = -r; v <= r; ++v) {
        const double kv = k[static_cast<std::size_t>(v + r)];
        detail::scaled_add_into(dst.data(), tmp.row(std::clamp(y - v, 0, h - 1)).data(), kv, w);
      }
    }
  });
  return out;
}

} // namespace

int support_radius(double sigma) { return static_cast<int>(std::ceil(3.0 * sigma)); }

Kernel dog_kernel(double sigma) {
  require_sigma(sigma, "sigma");
  Kernel k;
  k.radius = support_radius(sigma);
  k.weights.resize(static_cast<std::size_t>(k.side() * k.side()));
  const double inner = 0.5 * sigma;
  const double outer_norm = 1.0 / (2.0 * std::numbers::pi * sigma * sigma);
  const double inner_norm = 1.0 / (2.0 * std::numbers::pi * inner * inner);
  for (int v = -k.radius; v <= k.radius; ++v) {
    for (int u = -k.radius; u <= k.radius; ++u) {
      const double d2 = u * u + v * v;
      k.weights[static_cast<std::size_t>((v + k.radius) * k.side() + (u + k.radius))] =
          outer_norm * std::exp(-d2 / (2.0 * sigma * sigma)) - inner_norm * std::exp(-d2 / (2.0 * inner * inner));
    }
  }
  return k;
}

Kernel gaussian_kernel(double sigma) {
  require_sigma(sigma, "sigma_prime");
  Kernel k;
  k.radius = support_radius(sigma);
  k.weights.resize(static_cast<std::size_t>(k.side() * k.side()));
  for (int v = -k.radius; v <= k.radius; ++v) {
    for (int u = -k.radius; u <= k.radius; ++u) {
      k.weights[static_cast<std::size_t>((v + k.radius) * k.side() + (u + k.radius))] =
          std::exp(-(u * u + v * v) / (2.0 * sigma * sigma));
    }
  }
  return k;
}

GrayImage convolve(const GrayImage& image, const Kernel& kernel, int threads) {
  require_image(image);
  const int w = image.width();
  const int h = image.height();
  const int r = kernel.radius;
  GrayImage out(w, h);
  parallel_for(h, threads, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int v = -r; v <= r; ++v) {
          for (int u = -r; u <= r; ++u) {
            acc += image.clamped(x - u, y - v) * kernel.at(u, v);
          }
        }
        out(x, y) = acc;
      }
    }
  });
  return out;
}

GrayImage convolve_dog(const GrayImage& image, double sigma, int threads) {
  require_sigma(sigma, "sigma");
  require_image(image);
  const int radius = support_radius(sigma);
  GrayImage outer = convolve_separable(image, gaussian_1d(sigma, radius), threads);
  const GrayImage inner = convolve_separable(image, gaussian_1d(0.5 * sigma, radius), threads);
  auto o = outer.pixels();
  auto i = inner.pixels();
  for (std::size_t n = 0; n < o.size(); ++n) {
    o[n] -= i[n];
  }
  return outer;
}

GrayImage rectify(const GrayImage& image) {
  GrayImage out = image;
  for (double& v : out.pixels()) {
    v = std::max(v, 0.0);
  }
  return out;
}

GrayImage weighted_max_blur(const GrayImage& image, double sigma, int threads) {
  require_sigma(sigma, "sigma_prime");
  require_image(image);
  const int w = image.width();
  const int h = image.height();
  const int r = support_radius(sigma);

  const auto values = image.pixels();
  if (std::any_of(values.begin(), values.end(), [](double v) { return v < 0.0; })) {
    // The separable decomposition only holds for non-negative data.
    const Kernel g = gaussian_kernel(sigma);
    GrayImage out(w, h);
    parallel_for(h, threads, [&](int y0, int y1) {
      for (int y = y0; y < y1; ++y) {
        for (int x = 0; x < w; ++x) {
          double best = -std::numeric_limits<double>::infinity();
          for (int v = -r; v <= r; ++v) {
            for (int u = -r; u <= r; ++u) {
              best = std::max(best, image.clamped(x - u, y - v) * g.at(u, v));
            }
          }
          out(x, y) = best;
        }
      }
    });
    return out;
  }

  std::vector<double> g(static_cast<std::size_t>(2 * r + 1));
  for (int i = -r; i <= r; ++i) {
    g[static_cast<std::size_t>(i + r)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
  }

  // max_{u,v} g(u) g(v) f(x-u, y-v) = max_u g(u) [max_v g(v) f(x-u, y-v)]
  GrayImage vertical(w, h);
  parallel_for(h, threads, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      double* __restrict dst = vertical.row(y).data();
      for (int v = -r; v <= r; ++v) {
        const double gv = g[static_cast<std::size_t>(v + r)];
        const double* __restrict src = image.row(std::clamp(y - v, 0, h - 1)).data();
        detail::scaled_max_into(dst, src, gv, w);
      }
    }
  });

  GrayImage out(w, h);
  parallel_for(h, threads, [&](int y0, int y1) {
    std::vector<double> padded(static_cast<std::size_t>(w + 2 * r));
    for (int y = y0; y < y1; ++y) {
      auto src = vertical.row(y);
      for (int i = 0; i < w + 2 * r; ++i) {
        padded[static_cast<std::size_t>(i)] = src[static_cast<std::size_t>(std::clamp(i - r, 0, w - 1))];
      }
      double* __restrict dst = out.row(y).data();
      for (int u = -r; u <= r; ++u) {
        const double gu = g[static_cast<std::size_t>(u + r)];
        const double* __restrict shifted = padded.data() + r - u;
        detail::scaled_max_into(dst, shifted, gu, w);
      }
    }
  });
  return out;
}

} // namespace bcosfire
