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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bcosfire {

/// Dense row-major single-channel image of doubles.
class GrayImage {
public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  double operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

  /// Edge-replicated read.
  double clamped(int x, int y) const noexcept {
    return (*this)(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
  }

  std::span<double> pixels() noexcept { return data_; }
  std::span<const double> pixels() const noexcept { return data_; }
  std::span<double> row(int y) noexcept { return {data_.data() + index(0, y), static_cast<std::size_t>(width_)}; }
  std::span<const double> row(int y) const noexcept {
    return {data_.data() + index(0, y), static_cast<std::size_t>(width_)};
  }

  bool same_shape(const GrayImage& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Binary per-pixel mask. 1 marks pixels inside the field of view.
class Mask {
public:
  Mask() = default;
  Mask(int width, int height, std::uint8_t fill = 1);

  static Mask full(int width, int height) { return Mask(width, height, 1); }
  /// Pixels strictly above `level` become 1.
  static Mask from_image(const GrayImage& image, double level = 0.5);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::uint8_t& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  std::uint8_t operator()(int x, int y) const noexcept { return data_[index(x, y)]; }
  std::span<const std::uint8_t> pixels() const noexcept { return data_; }

  bool same_shape(const GrayImage& image) const noexcept {
    return width_ == image.width() && height_ == image.height();
  }
  bool same_shape(const Mask& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }
  std::size_t count() const noexcept;

  /// Pixelwise AND; both masks must share dimensions.
  Mask intersect(const Mask& other) const;

  friend bool operator==(const Mask&, const Mask&) = default;

private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// 8-bit three-plane color image.
class RgbImage {
public:
  RgbImage() = default;
  RgbImage(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  std::vector<std::uint8_t>& red() noexcept { return red_; }
  std::vector<std::uint8_t>& green() noexcept { return green_; }
  std::vector<std::uint8_t>& blue() noexcept { return blue_; }
  const std::vector<std::uint8_t>& red() const noexcept { return red_; }
  const std::vector<std::uint8_t>& green() const noexcept { return green_; }
  const std::vector<std::uint8_t>& blue() const noexcept { return blue_; }

  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    const auto i = static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    red_[i] = r;
    green_[i] = g;
    blue_[i] = b;
  }

private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> red_, green_, blue_;
};

} // namespace bcosfire
