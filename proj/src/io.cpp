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

#include "bcosfire/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "bcosfire/error.hpp"

namespace bcosfire {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const std::string& path) {
  std::string ext = fs::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw DataError("cannot open " + path);
  }
  return f;
}

RgbImage read_png(const std::string& path) {
  FilePtr file = open_file(path, "rb");
  png_byte header[8];
  if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0) {
    throw DataError(path + " is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("libpng initialization failed");
  }
  RgbImage out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("corrupt PNG " + path);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const std::size_t stride = png_get_rowbytes(png, info);
  std::vector<png_byte> buffer(stride * static_cast<std::size_t>(height));
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    rows[static_cast<std::size_t>(y)] = buffer.data() + stride * static_cast<std::size_t>(y);
  }
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  out = RgbImage(width, height);
  for (int y = 0; y < height; ++y) {
    const png_byte* row = rows[static_cast<std::size_t>(y)];
    for (int x = 0; x < width; ++x) {
      out.set(x, y, row[3 * x], row[3 * x + 1], row[3 * x + 2]);
    }
  }
  return out;
}

// Next header token of a PNM file, skipping comments.
int pnm_token(std::istream& in, const std::string& path) {
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    try {
      return std::stoi(tok);
    } catch (const std::exception&) {
      break;
    }
  }
  throw DataError("malformed PNM header in " + path);
}

RgbImage read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open " + path);
  }
  std::string magic;
  in >> magic;
  if (magic != "P2" && magic != "P3" && magic != "P5" && magic != "P6") {
    throw DataError(path + " is not a PGM/PPM file");
  }
  const bool color = magic == "P3" || magic == "P6";
  const bool binary = magic == "P5" || magic == "P6";
  const int width = pnm_token(in, path);
  const int height = pnm_token(in, path);
  const int maxval = pnm_token(in, path);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw DataError("unsupported PNM geometry in " + path);
  }
  const int channels = color ? 3 : 1;
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * channels;
  std::vector<int> values(count);
  if (binary) {
    in.get();
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(count * static_cast<std::size_t>(bytes));
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
      throw DataError("truncated PNM data in " + path);
    }
    for (std::size_t i = 0; i < count; ++i) {
      values[i] = bytes == 2 ? (raw[2 * i] << 8 | raw[2 * i + 1]) : raw[i];
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      values[i] = pnm_token(in, path);
    }
  }
  auto to8 = [maxval](int v) {
    return static_cast<std::uint8_t>(std::clamp(static_cast<int>(std::lround(v * 255.0 / maxval)), 0, 255));
  };
  RgbImage out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * channels;
      if (color) {
        out.set(x, y, to8(values[i]), to8(values[i + 1]), to8(values[i + 2]));
      } else {
        const auto g = to8(values[i]);
        out.set(x, y, g, g, g);
      }
    }
  }
  return out;
}

void write_png(const std::string& path, int width, int height, const std::vector<std::uint8_t>& pixels) {
  FilePtr file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw DataError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("failed writing PNG " + path);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width)));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::string resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal().string();
}

} // namespace

RgbImage read_rgb(const std::string& path) {
  if (!fs::exists(path)) {
    throw DataError("missing file: " + path);
  }
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    return read_png(path);
  }
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    return read_pnm(path);
  }
  throw DataError("unsupported image format: " + path);
}

GrayImage read_gray(const std::string& path) {
  const RgbImage rgb = read_rgb(path);
  GrayImage out(rgb.width(), rgb.height());
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = (rgb.red()[i] + rgb.green()[i] + rgb.blue()[i]) / (3.0 * 255.0);
  }
  return out;
}

GrayImage read_binary(const std::string& path) {
  GrayImage g = read_gray(path);
  for (double& v : g.pixels()) {
    v = v * 255.0 > 127.0 ? 1.0 : 0.0;
  }
  return g;
}

Mask read_mask(const std::string& path) { return Mask::from_image(read_binary(path), 0.5); }

void write_gray8(const std::string& path, int width, int height, const std::vector<std::uint8_t>& pixels) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    write_png(path, width, height, pixels);
    return;
  }
  if (ext == ".pgm") {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw DataError("cannot write " + path);
    }
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    return;
  }
  throw DataError("unsupported output format: " + path);
}

void write_scaled(const std::string& path, const GrayImage& image, double scale) {
  std::vector<std::uint8_t> px(image.size());
  auto src = image.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = static_cast<std::uint8_t>(std::clamp(std::lround(src[i] * scale), 0L, 255L));
  }
  write_gray8(path, image.width(), image.height(), px);
}

void write_binary(const std::string& path, const GrayImage& binary) { write_scaled(path, binary, 255.0); }

std::string ManifestEntry::stem() const { return fs::path(image).stem().string(); }

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot read manifest " + path);
  }
  const fs::path base = fs::path(path).parent_path();
  DatasetManifest manifest;
  try {
    const auto doc = nlohmann::json::parse(in);
    manifest.name = doc.value("name", std::string{});
    manifest.resolution = doc.value("resolution", std::string{});
    for (const auto& e : doc.at("entries")) {
      ManifestEntry entry;
      entry.image = resolve(base, e.at("image").get<std::string>());
      entry.ground_truth = resolve(base, e.at("ground_truth").get<std::string>());
      if (e.contains("fov_mask")) entry.fov_mask = resolve(base, e.at("fov_mask").get<std::string>());
      if (e.contains("od_mask")) entry.od_mask = resolve(base, e.at("od_mask").get<std::string>());
      manifest.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed manifest " + path + ": " + e.what());
  }
  std::vector<std::string> missing;
  for (const ManifestEntry& e : manifest.entries) {
    for (const std::string* p : {&e.image, &e.ground_truth}) {
      if (!fs::exists(*p)) missing.push_back(*p);
    }
    for (const auto* p : {&e.fov_mask, &e.od_mask}) {
      if (*p && !fs::exists(**p)) missing.push_back(**p);
    }
  }
  if (!missing.empty()) {
    std::string msg = "manifest references missing files:";
    for (const auto& m : missing) msg += "\n  " + m;
    throw DataError(msg);
  }
  return manifest;
}

std::string manifest_json(const DatasetManifest& manifest) {
  nlohmann::json doc;
  doc["name"] = manifest.name;
  doc["resolution"] = manifest.resolution;
  doc["entries"] = nlohmann::json::array();
  for (const ManifestEntry& e : manifest.entries) {
    nlohmann::json j{{"image", e.image}, {"ground_truth", e.ground_truth}};
    if (e.fov_mask) j["fov_mask"] = *e.fov_mask;
    if (e.od_mask) j["od_mask"] = *e.od_mask;
    doc["entries"].push_back(j);
  }
  return doc.dump(2) + "\n";
}

OdMode parse_od_mode(const std::string& text) {
  if (text == "exclude") return OdMode::exclude;
  if (text == "force") return OdMode::force;
  throw InvalidParameter("unknown OD mode '" + text + "' (expected exclude or force)");
}

Sample load_sample(const ManifestEntry& entry, const PreprocessOptions& options, OdMode od_mode, int threads) {
  const RgbImage rgb = read_rgb(entry.image);
  Sample s;
  s.name = entry.stem();
  s.gt = read_binary(entry.ground_truth);
  const Mask fov = entry.fov_mask ? read_mask(*entry.fov_mask) : Mask::full(rgb.width(), rgb.height());
  auto check = [&](int w, int h, const std::string& what) {
    if (w != rgb.width() || h != rgb.height()) {
      throw DimensionMismatch(what + " of " + entry.image + " is " + std::to_string(w) + "x" + std::to_string(h) +
                              ", image is " + std::to_string(rgb.width()) + "x" + std::to_string(rgb.height()));
    }
  };
  check(s.gt.width(), s.gt.height(), "ground truth");
  check(fov.width(), fov.height(), "FOV mask");
  s.mask = fov;
  s.eval_mask = fov;
  if (entry.od_mask) {
    const Mask od = read_mask(*entry.od_mask);
    check(od.width(), od.height(), "OD mask");
    s.mask = fov.intersect(od);
    s.eval_mask = od_mode == OdMode::exclude ? s.mask : fov;
  }
  s.image = preprocess(rgb, fov, options, threads);
  return s;
}

} // namespace bcosfire
