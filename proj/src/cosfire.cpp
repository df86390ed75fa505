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

#include "bcosfire/cosfire.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "bcosfire/error.hpp"
#include "bcosfire/kernels.hpp"
#include "bcosfire/parallel.hpp"
#include "row_ops.hpp"

namespace bcosfire {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kResponseFloor = 1e-9;

double normalize_angle(double phi) {
  double a = std::fmod(phi, kTwoPi);
  if (a < 0.0) {
    a += kTwoPi;
  }
  if (a >= kTwoPi) {
    a = 0.0;
  }
  return a;
}

double angular_distance(double a, double b) {
  const double d = std::fabs(normalize_angle(a) - normalize_angle(b));
  return std::min(d, kTwoPi - d);
}

double bilinear(const GrayImage& image, double x, double y) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = image.clamped(x0, y0) * (1.0 - fx) + image.clamped(x0 + 1, y0) * fx;
  const double bottom = image.clamped(x0, y0 + 1) * (1.0 - fx) + image.clamped(x0 + 1, y0 + 1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

// Indices of the circular local maxima of `values`. A plateau counts once,
// at its middle sample.
std::vector<int> circular_maxima(const std::vector<double>& values) {
  const int n = static_cast<int>(values.size());
  std::vector<int> peaks;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    return peaks;
  }
  // Start scanning just after a strict drop so no plateau wraps the origin.
  int start = 0;
  while (!(values[static_cast<std::size_t>(start)] != values[static_cast<std::size_t>((start + n - 1) % n)])) {
    ++start;
  }
  int i = 0;
  while (i < n) {
    const int run_begin = (start + i) % n;
    int len = 1;
    while (i + len < n && values[static_cast<std::size_t>((start + i + len) % n)] == values[static_cast<std::size_t>(run_begin)]) {
      ++len;
    }
    const double v = values[static_cast<std::size_t>(run_begin)];
    const double before = values[static_cast<std::size_t>((run_begin + n - 1) % n)];
    const double after = values[static_cast<std::size_t>((run_begin + len) % n)];
    if (v > before && v > after) {
      peaks.push_back((run_begin + len / 2) % n);
    }
    i += len;
  }
  return peaks;
}

void require_geometry(double sigma, double rho_max, double rho_step, double sigma0, double alpha) {
  if (!(sigma > 0.0) || !(rho_step > 0.0) || !(rho_max >= rho_step) || !(sigma0 > 0.0) || !(alpha >= 0.0) ||
      !std::isfinite(sigma) || !std::isfinite(rho_max) || !std::isfinite(sigma0) || !std::isfinite(alpha)) {
    std::ostringstream msg;
    msg << "invalid filter geometry: sigma=" << sigma << " rho_max=" << rho_max << " rho_step=" << rho_step
        << " sigma0=" << sigma0 << " alpha=" << alpha;
    throw InvalidParameter(msg.str());
  }
}

std::vector<double> radii_up_to(double rho_max, double rho_step) {
  std::vector<double> radii;
  const int count = static_cast<int>(std::floor(rho_max / rho_step + 1e-9));
  for (int k = 1; k <= count; ++k) {
    radii.push_back(k * rho_step);
  }
  return radii;
}

std::vector<double> to_log(const GrayImage& blurred) {
  std::vector<double> out(blurred.size());
  auto src = blurred.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = src[i] > 0.0 ? std::log(src[i]) : -std::numeric_limits<double>::infinity();
  }
  return out;
}

struct Term {
  const std::vector<double>* log_map;
  PixelPos offset;
  double weight;
};

// dst[x] += weight * src[clamp(x + dx)]
void accumulate_row(double* __restrict dst, const double* __restrict src, int width, int dx, double weight) {
  const int left = std::clamp(-dx, 0, width);
  const int right = std::clamp(width - dx, left, width);
  const double first = weight * src[0];
  const double last = weight * src[width - 1];
  for (int x = 0; x < left; ++x) {
    dst[x] += first;
  }
  detail::scaled_add_into(dst + left, src + dx + left, weight, right - left);
  for (int x = right; x < width; ++x) {
    dst[x] += last;
  }
}

// best = max over orientations of sum_i w_i log s_i / sum_i w_i. Rows are the
// outer loop so the source rows shared by all orientations stay in cache.
void fold_orientations(std::vector<double>& best, const std::vector<std::vector<Term>>& orientations,
                       double weight_sum, int width, int height, int threads) {
  parallel_for(height, threads, [&](int y0, int y1) {
    std::vector<double> acc(static_cast<std::size_t>(width));
    for (int y = y0; y < y1; ++y) {
      double* out = best.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width);
      for (const auto& terms : orientations) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (const Term& t : terms) {
          const int sy = std::clamp(y + t.offset.y, 0, height - 1);
          const double* src = t.log_map->data() + static_cast<std::size_t>(sy) * static_cast<std::size_t>(width);
          accumulate_row(acc.data(), src, width, t.offset.x, t.weight);
        }
        for (int x = 0; x < width; ++x) {
          out[x] = std::max(out[x], acc[static_cast<std::size_t>(x)] / weight_sum);
        }
      }
    }
  });
}

GrayImage exp_image(int width, int height, const std::vector<double>& log_values) {
  GrayImage out(width, height);
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = std::exp(log_values[i]);
  }
  return out;
}

double sum_weights(const WeightScheme& scheme) {
  double s = 0.0;
  for (double w : scheme.omega) {
    s += w;
  }
  return s;
}

std::string fixed6(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(6) << v;
  return s.str();
}

} // namespace

std::string to_string(FilterKind kind) { return kind == FilterKind::symmetric ? "symmetric" : "asymmetric"; }

FilterKind parse_filter_kind(const std::string& text) {
  if (text == "symmetric") {
    return FilterKind::symmetric;
  }
  if (text == "asymmetric") {
    return FilterKind::asymmetric;
  }
  throw InvalidParameter("unknown filter kind '" + text + "'");
}

void validate(const FilterConfig& config) {
  if (config.points.empty()) {
    throw InvalidParameter("filter config has no points");
  }
  if (!(config.sigma0 > 0.0) || !(config.alpha >= 0.0)) {
    throw InvalidParameter("filter config needs sigma0 > 0 and alpha >= 0");
  }
  int centers = 0;
  for (const FilterPoint& p : config.points) {
    if (!(p.sigma > 0.0) || !(p.rho >= 0.0) || !(p.phi >= 0.0 && p.phi < kTwoPi)) {
      throw InvalidParameter("filter point out of range: (" + std::to_string(p.sigma) + ", " + std::to_string(p.rho) +
                             ", " + std::to_string(p.phi) + ")");
    }
    centers += p.rho == 0.0 ? 1 : 0;
  }
  if (centers != 1) {
    throw InvalidParameter("filter config must contain exactly one center point, found " + std::to_string(centers));
  }
}

WeightScheme WeightScheme::for_points(std::span<const FilterPoint> points) {
  WeightScheme scheme;
  double rho_max = 0.0;
  for (const FilterPoint& p : points) {
    rho_max = std::max(rho_max, p.rho);
  }
  scheme.sigma_hat = rho_max / 3.0;
  scheme.omega.reserve(points.size());
  for (const FilterPoint& p : points) {
    scheme.omega.push_back(p.rho == 0.0 ? 1.0
                                        : std::exp(-(p.rho * p.rho) / (2.0 * scheme.sigma_hat * scheme.sigma_hat)));
  }
  return scheme;
}

FilterConfig configure_from_prototype(const GrayImage& prototype, PixelPos center, std::span<const double> radii,
                                      double sigma, const PrototypeOptions& options) {
  if (std::find(radii.begin(), radii.end(), 0.0) == radii.end()) {
    throw InvalidParameter("radii must include 0 (the filter center)");
  }
  if (!(sigma > 0.0)) {
    throw InvalidParameter("sigma must be positive");
  }
  if (!(options.peak_fraction > 0.0 && options.peak_fraction < 1.0)) {
    throw InvalidParameter("peak fraction must lie in (0, 1)");
  }
  if (options.angular_samples < 4) {
    throw InvalidParameter("need at least 4 angular samples");
  }
  if (center.x < 0 || center.y < 0 || center.x >= prototype.width() || center.y >= prototype.height()) {
    throw InvalidParameter("prototype center lies outside the image");
  }

  const GrayImage c_sigma = rectify(convolve_dog(prototype, sigma));
  const int n = options.angular_samples;
  const double step = kTwoPi / n;
  const double merge = options.merge_window_deg * std::numbers::pi / 180.0;

  FilterConfig config;
  config.sigma0 = options.sigma0;
  config.alpha = options.alpha;
  config.points.push_back({sigma, 0.0, 0.0});

  std::set<double> unique_radii(radii.begin(), radii.end());
  for (double rho : unique_radii) {
    if (rho <= 0.0) {
      continue;
    }
    std::vector<double> samples(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double a = i * step;
      samples[static_cast<std::size_t>(i)] = bilinear(c_sigma, center.x + rho * std::cos(a), center.y - rho * std::sin(a));
    }
    const double circle_max = *std::max_element(samples.begin(), samples.end());
    if (circle_max <= kResponseFloor) {
      continue;
    }
    std::vector<std::pair<int, double>> peaks;
    for (int i : circular_maxima(samples)) {
      const double v = samples[static_cast<std::size_t>(i)];
      if (v >= options.peak_fraction * circle_max) {
        peaks.emplace_back(i, v);
      }
    }
    // Strongest first; drop any peak within the merge window of a kept one.
    std::stable_sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<int> kept;
    for (const auto& [i, v] : peaks) {
      const bool near = std::any_of(kept.begin(), kept.end(),
                                    [&](int k) { return angular_distance(i * step, k * step) < merge; });
      if (!near) {
        kept.push_back(i);
      }
    }
    std::sort(kept.begin(), kept.end());
    for (int i : kept) {
      config.points.push_back({sigma, rho, normalize_angle(i * step)});
    }
  }

  if (config.points.size() == 1) {
    throw ConfigurationFailed("prototype has no DoG response above the numeric floor on any circle");
  }

  bool closed = true;
  for (const FilterPoint& p : config.points) {
    if (p.rho == 0.0) {
      continue;
    }
    closed = closed && std::any_of(config.points.begin(), config.points.end(), [&](const FilterPoint& q) {
               return q.rho == p.rho && angular_distance(q.phi, p.phi + std::numbers::pi) < merge;
             });
  }
  config.kind = closed ? FilterKind::symmetric : FilterKind::asymmetric;
  return config;
}

FilterConfig analytic_symmetric(double sigma, double rho_max, double rho_step, double sigma0, double alpha) {
  require_geometry(sigma, rho_max, rho_step, sigma0, alpha);
  FilterConfig config{{{sigma, 0.0, 0.0}}, sigma0, alpha, FilterKind::symmetric};
  for (double rho : radii_up_to(rho_max, rho_step)) {
    config.points.push_back({sigma, rho, std::numbers::pi / 2.0});
    config.points.push_back({sigma, rho, 3.0 * std::numbers::pi / 2.0});
  }
  return config;
}

FilterConfig analytic_asymmetric(double sigma, double rho_max, double rho_step, double sigma0, double alpha) {
  require_geometry(sigma, rho_max, rho_step, sigma0, alpha);
  FilterConfig config{{{sigma, 0.0, 0.0}}, sigma0, alpha, FilterKind::asymmetric};
  for (double rho : radii_up_to(rho_max, rho_step)) {
    config.points.push_back({sigma, rho, std::numbers::pi / 2.0});
  }
  return config;
}

FilterConfig rotate_config(const FilterConfig& config, double psi) {
  FilterConfig out = config;
  for (FilterPoint& p : out.points) {
    p.phi = normalize_angle(p.phi + psi);
  }
  return out;
}

OrientationBank make_bank(const FilterConfig& config) {
  validate(config);
  const int count = config.kind == FilterKind::symmetric ? 12 : 24;
  OrientationBank bank{config, {}};
  bank.orientations.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double psi = k * std::numbers::pi / 12.0;
    bank.orientations.push_back({psi, rotate_config(config, psi)});
  }
  return bank;
}

PixelPos point_offset(const FilterPoint& point) {
  // The point sits at (rho cos phi, rho sin phi) from the center with y up;
  // rows grow downwards.
  return {static_cast<int>(std::lround(point.rho * std::cos(point.phi))),
          -static_cast<int>(std::lround(point.rho * std::sin(point.phi)))};
}

GrayImage blur_shift_response(const GrayImage& c_sigma, const FilterPoint& point, double sigma0, double alpha,
                              int threads) {
  const GrayImage blurred = weighted_max_blur(c_sigma, blur_sigma(sigma0, alpha, point.rho), threads);
  const PixelPos off = point_offset(point);
  GrayImage out(c_sigma.width(), c_sigma.height());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      out(x, y) = blurred.clamped(x + off.x, y + off.y);
    }
  }
  return out;
}

GrayImage combine_responses(std::span<const GrayImage> blurred, const WeightScheme& scheme) {
  if (blurred.empty() || blurred.size() != scheme.omega.size()) {
    throw DimensionMismatch("need one weight per response image (" + std::to_string(blurred.size()) + " images, " +
                            std::to_string(scheme.omega.size()) + " weights)");
  }
  for (const GrayImage& img : blurred) {
    if (!img.same_shape(blurred.front())) {
      throw DimensionMismatch("response images differ in size");
    }
  }
  const double weight_sum = sum_weights(scheme);
  GrayImage out(blurred.front().width(), blurred.front().height());
  auto dst = out.pixels();
  for (std::size_t p = 0; p < dst.size(); ++p) {
    double acc = 0.0;
    bool zero = false;
    for (std::size_t i = 0; i < blurred.size(); ++i) {
      const double s = blurred[i].pixels()[p];
      if (s <= 0.0) {
        zero = true;
        break;
      }
      acc += scheme.omega[i] * std::log(s);
    }
    dst[p] = zero ? 0.0 : std::exp(acc / weight_sum);
  }
  return out;
}

ResponseCache::ResponseCache(const GrayImage& image, int threads) : image_(image), threads_(threads) {}

const GrayImage& ResponseCache::dog(double sigma) {
  std::lock_guard lock(mutex_);
  auto it = dog_.find(sigma);
  if (it == dog_.end()) {
    it = dog_.emplace(sigma, std::make_shared<const GrayImage>(rectify(convolve_dog(image_, sigma, threads_)))).first;
  }
  return *it->second;
}

const std::vector<double>& ResponseCache::log_blurred(double sigma, double blur) {
  const GrayImage& c_sigma = dog(sigma);
  std::lock_guard lock(mutex_);
  auto key = std::make_pair(sigma, blur);
  auto it = log_blurred_.find(key);
  if (it == log_blurred_.end()) {
    auto map = std::make_shared<const std::vector<double>>(to_log(weighted_max_blur(c_sigma, blur, threads_)));
    it = log_blurred_.emplace(key, std::move(map)).first;
  }
  return *it->second;
}

void ResponseCache::clear() {
  std::lock_guard lock(mutex_);
  dog_.clear();
  log_blurred_.clear();
}

GrayImage apply_filter(ResponseCache& cache, const OrientationBank& bank, int threads) {
  const GrayImage& image = cache.image();
  if (image.empty()) {
    throw InvalidParameter("image is empty");
  }
  const WeightScheme scheme = WeightScheme::for_points(bank.base.points);
  const double weight_sum = sum_weights(scheme);
  std::vector<std::vector<Term>> orientations;
  for (const Orientation& o : bank.orientations) {
    std::vector<Term>& terms = orientations.emplace_back();
    for (std::size_t i = 0; i < o.config.points.size(); ++i) {
      const FilterPoint& p = o.config.points[i];
      terms.push_back({&cache.log_blurred(p.sigma, blur_sigma(o.config.sigma0, o.config.alpha, p.rho)),
                       point_offset(p), scheme.omega[i]});
    }
  }
  std::vector<double> best(image.size(), -std::numeric_limits<double>::infinity());
  fold_orientations(best, orientations, weight_sum, image.width(), image.height(), threads);
  return exp_image(image.width(), image.height(), best);
}

GrayImage apply_filter(const GrayImage& image, const OrientationBank& bank, const ApplyOptions& options) {
  if (options.use_cache) {
    ResponseCache cache(image, options.threads);
    return apply_filter(cache, bank, options.threads);
  }
  if (image.empty()) {
    throw InvalidParameter("image is empty");
  }
  const WeightScheme scheme = WeightScheme::for_points(bank.base.points);
  const double weight_sum = sum_weights(scheme);
  std::vector<double> best(image.size(), -std::numeric_limits<double>::infinity());
  for (const Orientation& o : bank.orientations) {
    std::vector<std::vector<double>> maps;
    maps.reserve(o.config.points.size());
    for (const FilterPoint& p : o.config.points) {
      const GrayImage c_sigma = rectify(convolve_dog(image, p.sigma, options.threads));
      maps.push_back(to_log(weighted_max_blur(c_sigma, blur_sigma(o.config.sigma0, o.config.alpha, p.rho), options.threads)));
    }
    std::vector<Term> terms;
    for (std::size_t i = 0; i < maps.size(); ++i) {
      terms.push_back({&maps[i], point_offset(o.config.points[i]), scheme.omega[i]});
    }
    fold_orientations(best, {terms}, weight_sum, image.width(), image.height(), options.threads);
  }
  return exp_image(image.width(), image.height(), best);
}

GrayImage apply_orientation(const GrayImage& image, const FilterConfig& rotated, int threads) {
  OrientationBank single{rotated, {{0.0, rotated}}};
  return apply_filter(image, single, {false, threads});
}

GrayImage normalized_response(const GrayImage& raw, const Mask& mask) {
  if (!mask.same_shape(raw)) {
    throw DimensionMismatch("mask and response differ in size");
  }
  double peak = 0.0;
  auto src = raw.pixels();
  auto m = mask.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (m[i]) {
      peak = std::max(peak, src[i]);
    }
  }
  GrayImage out(raw.width(), raw.height());
  if (peak <= 0.0) {
    return out;
  }
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = m[i] ? src[i] / peak * 255.0 : 0.0;
  }
  return out;
}

GrayImage threshold_response(const GrayImage& normalized, const Mask& mask, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 255.0)) {
    throw InvalidParameter("threshold must lie in [0, 255], got " + std::to_string(threshold));
  }
  if (!mask.same_shape(normalized)) {
    throw DimensionMismatch("mask and response differ in size");
  }
  GrayImage out(normalized.width(), normalized.height());
  auto src = normalized.pixels();
  auto m = mask.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = (m[i] && src[i] > threshold) ? 1.0 : 0.0;
  }
  return out;
}

GrayImage combined_response(const GrayImage& image, const OrientationBank& sym, const OrientationBank* asym,
                            const ApplyOptions& options) {
  if (!options.use_cache) {
    GrayImage r = apply_filter(image, sym, options);
    if (asym != nullptr) {
      const GrayImage ra = apply_filter(image, *asym, options);
      auto dst = r.pixels();
      auto add = ra.pixels();
      for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] += add[i];
      }
    }
    return r;
  }
  ResponseCache cache(image, options.threads);
  GrayImage r = apply_filter(cache, sym, options.threads);
  if (asym != nullptr) {
    const GrayImage ra = apply_filter(cache, *asym, options.threads);
    auto dst = r.pixels();
    auto add = ra.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] += add[i];
    }
  }
  return r;
}

GrayImage segment(const GrayImage& image, const OrientationBank& sym, const OrientationBank& asym, const Mask& mask,
                  double threshold, const ApplyOptions& options) {
  if (!(threshold >= 0.0 && threshold <= 255.0)) {
    throw InvalidParameter("threshold must lie in [0, 255], got " + std::to_string(threshold));
  }
  return threshold_response(normalized_response(combined_response(image, sym, &asym, options), mask), mask, threshold);
}

void write_config(std::ostream& out, const FilterConfig& config) {
  out << "# bcosfire filter config v1\n";
  out << "kind " << to_string(config.kind) << "\n";
  out << "sigma0 " << fixed6(config.sigma0) << "\n";
  out << "alpha " << fixed6(config.alpha) << "\n";
  for (const FilterPoint& p : config.points) {
    out << "point " << fixed6(p.sigma) << " " << fixed6(p.rho) << " " << fixed6(p.phi) << "\n";
  }
}

FilterConfig read_config(std::istream& in) {
  FilterConfig config;
  config.points.clear();
  bool have_kind = false, have_sigma0 = false, have_alpha = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    auto fail = [&] { throw DataError("malformed filter config at line " + std::to_string(line_no) + ": " + line); };
    if (key == "kind") {
      std::string kind;
      if (!(fields >> kind) || (kind != "symmetric" && kind != "asymmetric")) fail();
      config.kind = parse_filter_kind(kind);
      have_kind = true;
    } else if (key == "sigma0") {
      if (!(fields >> config.sigma0)) fail();
      have_sigma0 = true;
    } else if (key == "alpha") {
      if (!(fields >> config.alpha)) fail();
      have_alpha = true;
    } else if (key == "point") {
      FilterPoint p;
      if (!(fields >> p.sigma >> p.rho >> p.phi)) fail();
      p.phi = normalize_angle(p.phi);
      config.points.push_back(p);
    } else {
      fail();
    }
  }
  if (!have_kind || !have_sigma0 || !have_alpha) {
    throw DataError("filter config is missing kind, sigma0 or alpha");
  }
  try {
    validate(config);
  } catch (const InvalidParameter& e) {
    throw DataError(std::string("invalid filter config: ") + e.what());
  }
  return config;
}

void save_config(const std::string& path, const FilterConfig& config) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write filter config " + path);
  }
  write_config(out, config);
}

FilterConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot read filter config " + path);
  }
  return read_config(in);
}

} // namespace bcosfire
