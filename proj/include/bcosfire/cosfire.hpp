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

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bcosfire/image.hpp"

namespace bcosfire {

enum class FilterKind { symmetric, asymmetric };

std::string to_string(FilterKind kind);
FilterKind parse_filter_kind(const std::string& text);

/// One point of interest: DoG scale, circle radius and polar angle. Angles
/// are counter-clockwise with the y axis pointing up (towards row 0).
struct FilterPoint {
  double sigma = 0.0;
  double rho = 0.0;
  double phi = 0.0;

  friend bool operator==(const FilterPoint&, const FilterPoint&) = default;
};

struct FilterConfig {
  std::vector<FilterPoint> points;
  double sigma0 = 1.0;
  double alpha = 0.0;
  FilterKind kind = FilterKind::symmetric;

  friend bool operator==(const FilterConfig&, const FilterConfig&) = default;
};

/// Throws InvalidParameter when the config breaks its invariants.
void validate(const FilterConfig& config);

/// Per-point weights exp(-rho^2 / (2 sigma_hat^2)), sigma_hat = max(rho) / 3.
struct WeightScheme {
  double sigma_hat = 0.0;
  std::vector<double> omega;

  static WeightScheme for_points(std::span<const FilterPoint> points);
};

struct Orientation {
  double psi = 0.0;
  FilterConfig config;
};

struct OrientationBank {
  FilterConfig base;
  std::vector<Orientation> orientations;
};

/// Integer pixel location in image coordinates (row 0 at the top).
struct PixelPos {
  int x = 0;
  int y = 0;
};

struct PrototypeOptions {
  int angular_samples = 360;
  double peak_fraction = 0.2;
  double merge_window_deg = 10.0;
  double sigma0 = 1.0;
  double alpha = 0.0;
};

/// Finds the points of interest of a prototype pattern: local maxima of the
/// rectified DoG response sampled along each circle around `center`.
/// Radius 0 contributes the center point.
FilterConfig configure_from_prototype(const GrayImage& prototype, PixelPos center, std::span<const double> radii,
                                      double sigma, const PrototypeOptions& options = {});

/// Closed-form configuration of a vertical full bar: the center plus
/// phi = pi/2 and 3pi/2 on every circle rho_step, 2 rho_step, ..., rho_max.
FilterConfig analytic_symmetric(double sigma, double rho_max, double rho_step, double sigma0, double alpha);

/// Closed-form configuration of a bar ending above the center (phi = pi/2).
FilterConfig analytic_asymmetric(double sigma, double rho_max, double rho_step, double sigma0, double alpha);

/// Adds psi to every angle, normalized into [0, 2pi).
FilterConfig rotate_config(const FilterConfig& config, double psi);

/// 12 rotations (symmetric) or 24 rotations (asymmetric) spaced pi/12 apart.
OrientationBank make_bank(const FilterConfig& config);

/// Standard deviation of the blurring Gaussian for a point on circle rho.
inline double blur_sigma(double sigma0, double alpha, double rho) { return sigma0 + alpha * rho; }

/// Integer pixel offset (columns, rows) at which a point's blurred response
/// is read so that it lands on the filter center.
PixelPos point_offset(const FilterPoint& point);

/// Blurred DoG response of one point moved to the filter center.
GrayImage blur_shift_response(const GrayImage& c_sigma, const FilterPoint& point, double sigma0, double alpha,
                              int threads = 1);

/// Weighted geometric mean of the responses, pixelwise.
GrayImage combine_responses(std::span<const GrayImage> blurred, const WeightScheme& scheme);

/// Memoizes rectified DoG responses per sigma and blurred responses per
/// (sigma, blur sigma). Safe to share between threads.
class ResponseCache {
public:
  ResponseCache(const GrayImage& image, int threads = 1);

  const GrayImage& image() const noexcept { return image_; }
  const GrayImage& dog(double sigma);
  /// Log of the blurred map (-inf where the blurred map is zero).
  const std::vector<double>& log_blurred(double sigma, double blur);
  void clear();

private:
  GrayImage image_;
  int threads_;
  std::mutex mutex_;
  std::map<double, std::shared_ptr<const GrayImage>> dog_;
  std::map<std::pair<double, double>, std::shared_ptr<const std::vector<double>>> log_blurred_;
};

struct ApplyOptions {
  bool use_cache = true;
  int threads = 1;
};

/// Rotation-invariant response: the pixelwise maximum over the bank's
/// orientations of the combined point responses.
GrayImage apply_filter(const GrayImage& image, const OrientationBank& bank, const ApplyOptions& options = {});
GrayImage apply_filter(ResponseCache& cache, const OrientationBank& bank, int threads = 1);

/// Response of a single orientation of the bank, uncached.
GrayImage apply_orientation(const GrayImage& image, const FilterConfig& rotated, int threads = 1);

/// Rescales a raw response so that its maximum over mask pixels is 255.
/// Pixels outside the mask become 0; an all-zero response stays zero.
GrayImage normalized_response(const GrayImage& raw, const Mask& mask);

/// g = 1 where response > threshold inside the mask.
GrayImage threshold_response(const GrayImage& normalized, const Mask& mask, double threshold);

/// r_s + r_a, or r_s alone when asym is null.
GrayImage combined_response(const GrayImage& image, const OrientationBank& sym, const OrientationBank* asym,
                            const ApplyOptions& options = {});

/// Full filtering and thresholding of a preprocessed image.
GrayImage segment(const GrayImage& image, const OrientationBank& sym, const OrientationBank& asym, const Mask& mask,
                  double threshold, const ApplyOptions& options = {});

/// Line-based text format: kind, sigma0, alpha, then one `point` line per
/// (sigma, rho, phi), all with 6 decimals.
void write_config(std::ostream& out, const FilterConfig& config);
FilterConfig read_config(std::istream& in);
void save_config(const std::string& path, const FilterConfig& config);
FilterConfig load_config(const std::string& path);

} // namespace bcosfire
