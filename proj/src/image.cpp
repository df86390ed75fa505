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

#include "bcosfire/image.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "bcosfire/error.hpp"

namespace bcosfire {

namespace {

void check_dims(int width, int height) {
  if (width < 0 || height < 0) {
    throw InvalidParameter("image dimensions must be non-negative, got " + std::to_string(width) + "x" +
                           std::to_string(height));
  }
}

std::size_t area(int width, int height) {
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

} // namespace

GrayImage::GrayImage(int width, int height, double fill) : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(area(width, height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != area(width, height)) {
    throw DimensionMismatch("pixel buffer holds " + std::to_string(data_.size()) + " values, expected " +
                            std::to_string(area(width, height)));
  }
}

Mask::Mask(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(area(width, height), fill ? 1 : 0);
}

Mask Mask::from_image(const GrayImage& image, double level) {
  Mask mask(image.width(), image.height(), 0);
  auto src = image.pixels();
  std::transform(src.begin(), src.end(), mask.data_.begin(),
                 [level](double v) { return static_cast<std::uint8_t>(v > level ? 1 : 0); });
  return mask;
}

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

Mask Mask::intersect(const Mask& other) const {
  if (!same_shape(other)) {
    throw DimensionMismatch("cannot intersect masks of different dimensions");
  }
  Mask out(width_, height_, 0);
  for (std::size_t i = 0; i < data_.size(); ++i) {
    out.data_[i] = static_cast<std::uint8_t>(data_[i] & other.data_[i]);
  }
  return out;
}

RgbImage::RgbImage(int width, int height) : width_(width), height_(height) {
  check_dims(width, height);
  red_.assign(area(width, height), 0);
  green_.assign(area(width, height), 0);
  blue_.assign(area(width, height), 0);
}

} // namespace bcosfire
