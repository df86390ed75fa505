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
#include <optional>
#include <string>
#include <vector>

#include "bcosfire/image.hpp"
#include "bcosfire/preprocess.hpp"
#include "bcosfire/tune.hpp"

namespace bcosfire {

/// Reads 8/16-bit PNG (gray, gray+alpha, RGB, RGBA) or binary/ASCII PGM/PPM.
/// Gray inputs are replicated into all three planes.
RgbImage read_rgb(const std::string& path);

/// Channel mean scaled to [0,1].
GrayImage read_gray(const std::string& path);

/// 0/1 image, pixels binarized at > 127.
GrayImage read_binary(const std::string& path);
Mask read_mask(const std::string& path);

/// Writes an 8-bit gray image; format chosen by extension (.png or .pgm).
void write_gray8(const std::string& path, int width, int height, const std::vector<std::uint8_t>& pixels);

/// Values are rounded and clamped to 0..255.
void write_scaled(const std::string& path, const GrayImage& image, double scale = 1.0);

/// Binary image written as 0/255.
void write_binary(const std::string& path, const GrayImage& binary);

struct ManifestEntry {
  std::string image;
  std::string ground_truth;
  std::optional<std::string> fov_mask;
  std::optional<std::string> od_mask;

  /// File name of the image without directory and extension.
  std::string stem() const;
};

struct DatasetManifest {
  std::string name;
  std::string resolution;
  std::vector<ManifestEntry> entries;
};

/// Parses the JSON manifest; relative paths resolve against the manifest's
/// directory. Every referenced file must exist.
DatasetManifest load_manifest(const std::string& path);
std::string manifest_json(const DatasetManifest& manifest);

/// How an optic-disc mask enters evaluation.
enum class OdMode {
  exclude, ///< OD pixels are left out of the confusion counts
  force,   ///< OD pixels are counted, but always predicted non-vessel
};

OdMode parse_od_mode(const std::string& text);

/// Loads, validates and preprocesses one manifest entry.
Sample load_sample(const ManifestEntry& entry, const PreprocessOptions& options, OdMode od_mode, int threads = 1);

} // namespace bcosfire
