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

#include <vector>

#include "bcosfire/image.hpp"

namespace bcosfire {

/// Square kernel spanning [-radius, radius] on both axes.
struct Kernel {
  int radius = 0;
  std::vector<double> weights;

  int side() const noexcept { return 2 * radius + 1; }
  double at(int u, int v) const noexcept { return weights[static_cast<std::size_t>((v + radius) * side() + (u + radius))]; }
};

/// Difference of a sigma Gaussian and a 0.5*sigma Gaussian, both unit mass,
/// truncated at ceil(3*sigma). Negative at the center.
Kernel dog_kernel(double sigma);

/// Peak-normalized Gaussian (center weight 1) truncated at ceil(3*sigma).
Kernel gaussian_kernel(double sigma);

/// Direct 2-D convolution with edge replication.
GrayImage convolve(const GrayImage& image, const Kernel& kernel, int threads = 1);

/// Same result as convolve(image, dog_kernel(sigma)) computed through two
/// separable Gaussian passes.
GrayImage convolve_dog(const GrayImage& image, double sigma, int threads = 1);

/// Half-wave rectification, max(v, 0).
GrayImage rectify(const GrayImage& image);

/// out(x,y) = max over |dx|,|dy| <= ceil(3*sigma) of
/// image(x-dx, y-dy) * G(dx, dy), with G peak-normalized. Expects a
/// non-negative image; the max is evaluated separably.
GrayImage weighted_max_blur(const GrayImage& image, double sigma, int threads = 1);

/// Kernel radius used for a given standard deviation.
int support_radius(double sigma);

} // namespace bcosfire
