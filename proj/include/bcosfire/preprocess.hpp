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

#include "bcosfire/image.hpp"

namespace bcosfire {

/// Green plane scaled to [0,1].
GrayImage extract_green(const RgbImage& rgb);

/// Grows the masked region outward one pixel per iteration, filling each new
/// pixel with the mean of its already-filled 8-neighbors. Pixels inside the
/// mask are never touched; pixels not reached keep their original value.
GrayImage smooth_fov_border(const GrayImage& gray, const Mask& mask, int iterations);

/// Contrast-limited adaptive histogram equalization on a [0,1] image with 256
/// bins. `clip_limit` in (0,1] interpolates the per-bin ceiling between the
/// mean bin count (0) and the full tile population (1, no clipping).
GrayImage clahe(const GrayImage& gray, int tiles_x, int tiles_y, double clip_limit, int threads = 1);

struct PreprocessOptions {
  int smooth_iterations = 10;
  int clahe_tiles_x = 8;
  int clahe_tiles_y = 8;
  double clahe_clip = 0.01;
};

/// Green channel, border smoothing, then CLAHE.
GrayImage preprocess(const RgbImage& rgb, const Mask& fov, const PreprocessOptions& options = {}, int threads = 1);

/// The same chain for an image that is already single-channel.
GrayImage preprocess(const GrayImage& gray, const Mask& fov, const PreprocessOptions& options = {}, int threads = 1);

} // namespace bcosfire
