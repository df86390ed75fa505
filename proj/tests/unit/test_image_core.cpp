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

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "bcosfire/error.hpp"
#include "bcosfire/image.hpp"
#include "bcosfire/io.hpp"
#include "bcosfire/kernels.hpp"
#include "bcosfire/parallel.hpp"
#include "bcosfire/synthetic.hpp"
#include "oracles.hpp"

using namespace bcosfire;

TEST_CASE("image containers validate their shape") {
  CHECK_THROWS_AS(GrayImage(-1, 3), InvalidParameter);
  CHECK_THROWS_AS(GrayImage(2, 2, std::vector<double>(3)), DimensionMismatch);
  GrayImage g(3, 2, 0.5);
  g(2, 1) = 7;
  CHECK(g.clamped(10, 10) == 7);
  CHECK(g.clamped(-4, -4) == 0.5);
  CHECK(g.row(1)[2] == 7);

  Mask a(4, 4, 1), b(4, 4, 0);
  b(1, 1) = 1;
  b(2, 3) = 1;
  CHECK(a.intersect(b) == b);
  CHECK(a.intersect(b).count() == 2);
  CHECK_THROWS_AS(a.intersect(Mask(3, 4)), DimensionMismatch);
  CHECK(Mask::from_image(GrayImage(2, 1, std::vector<double>{0.2, 0.9})).count() == 1);
}

TEST_CASE("dog kernel shape") {
  for (double sigma : {0.8, 1.7, 2.5, 4.8}) {
    const Kernel k = dog_kernel(sigma);
    CHECK(k.radius == static_cast<int>(std::ceil(3 * sigma)));
    CHECK(k.at(0, 0) < 0.0);
    CHECK(k.at(k.radius, 0) > 0.0);
    double sum = 0;
    for (double w : k.weights) sum += w;
    // Two unit-mass Gaussians cancel up to the truncated tail of the wide one,
    // once the narrow one is resolved by the pixel grid.
    if (sigma >= 1.5) CHECK(std::fabs(sum) < 0.02);
    for (int v = -k.radius; v <= k.radius; ++v)
      for (int u = -k.radius; u <= k.radius; ++u) CHECK(k.at(u, v) == doctest::Approx(k.at(v, -u)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(dog_kernel(0.0), InvalidParameter);
  CHECK_THROWS_AS(dog_kernel(-1.0), InvalidParameter);
}

TEST_CASE("separable and direct DoG agree with a brute-force oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 4; ++trial) {
    const GrayImage img = oracle::random_image(23 + trial, 17, rng);
    const double sigma = 0.9 + 0.7 * trial;
    const GrayImage ref = oracle::dog(img, sigma);
    const GrayImage direct = convolve(img, dog_kernel(sigma));
    const GrayImage fast = convolve_dog(img, sigma, 3);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(direct.pixels()[i] == doctest::Approx(ref.pixels()[i]).epsilon(0).scale(1).epsilon(1e-10));
      CHECK(std::fabs(fast.pixels()[i] - ref.pixels()[i]) < 1e-12);
    }
  }
}

TEST_CASE("DoG of a constant image vanishes up to truncation") {
  const GrayImage flat(30, 30, 0.7);
  const GrayImage r = convolve_dog(flat, 2.0);
  const Kernel k = dog_kernel(2.0);
  const double mass = std::accumulate(k.weights.begin(), k.weights.end(), 0.0);
  for (double v : r.pixels()) CHECK(v == doctest::Approx(0.7 * mass).epsilon(1e-9));
}

TEST_CASE("weighted max blur matches the windowed maximum") {
  std::mt19937_64 rng(5);
  for (double lo : {0.0, -1.0}) {
    const GrayImage img = oracle::random_image(19, 21, rng, lo, 1.0);
    for (double s : {0.6, 1.4, 3.0}) {
      const GrayImage ref = oracle::max_blur(img, s);
      const GrayImage got = weighted_max_blur(img, s, 2);
      for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::fabs(got.pixels()[i] - ref.pixels()[i]) < 1e-14);
    }
  }
}

TEST_CASE("max blur properties") {
  std::mt19937_64 rng(8);
  const GrayImage img = oracle::random_image(16, 16, rng);
  const GrayImage b = weighted_max_blur(img, 1.5);
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK(b.pixels()[i] >= img.pixels()[i]); // center weight is one
    CHECK(b.pixels()[i] <= 1.0);
  }
  // Wider blur never lowers the result.
  const GrayImage wider = weighted_max_blur(img, 3.0);
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(wider.pixels()[i] >= b.pixels()[i] - 1e-15);
}

TEST_CASE("rectify clips negatives only") {
  const GrayImage g(3, 1, std::vector<double>{-2, 0, 3});
  CHECK(rectify(g) == GrayImage(3, 1, std::vector<double>{0, 0, 3}));
}

TEST_CASE("results do not depend on the thread count") {
  std::mt19937_64 rng(3);
  const GrayImage img = oracle::random_image(40, 33, rng);
  const GrayImage one = weighted_max_blur(convolve_dog(img, 2.2, 1), 1.7, 1);
  for (int t : {2, 3, 7, 64}) CHECK(weighted_max_blur(convolve_dog(img, 2.2, t), 1.7, t) == one);
}

TEST_CASE("parallel_for covers every index once and propagates failures") {
  for (int threads : {1, 2, 5, 100}) {
    for (int count : {0, 1, 7, 64}) {
      std::vector<std::atomic<int>> hits(static_cast<std::size_t>(count));
      parallel_for(count, threads, [&](int b, int e) {
        for (int i = b; i < e; ++i) hits[static_cast<std::size_t>(i)]++;
      });
      for (auto& h : hits) CHECK(h.load() == 1);
    }
  }
  CHECK_THROWS_AS(parallel_for(10, 3, [](int b, int) {
                    if (b == 0) throw DataError("boom");
                  }),
                  DataError);
}

TEST_CASE("image files round-trip") {
  oracle::TempDir dir("io");
  std::vector<std::uint8_t> px(7 * 5);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>(i * 7);
  for (const char* name : {"a.png", "a.pgm"}) {
    write_gray8(dir / name, 7, 5, px);
    const GrayImage g = read_gray(dir / name);
    REQUIRE(g.width() == 7);
    REQUIRE(g.height() == 5);
    for (std::size_t i = 0; i < px.size(); ++i) CHECK(std::lround(g.pixels()[i] * 255) == px[i]);
  }
  {
    std::ofstream(dir / "b.ppm") << "P3\n# comment\n2 1\n255\n255 0 0  10 20 30\n";
    const RgbImage rgb = read_rgb(dir / "b.ppm");
    CHECK(rgb.red()[0] == 255);
    CHECK(rgb.green()[1] == 20);
    CHECK(rgb.blue()[1] == 30);
  }
  {
    std::ofstream(dir / "m.pgm") << "P2\n3 1\n255\n0 128 255\n";
    const Mask m = read_mask(dir / "m.pgm");
    CHECK(m(0, 0) == 0);
    CHECK(m(1, 0) == 1);
    CHECK(m(2, 0) == 1);
  }
  const GrayImage bin(2, 1, std::vector<double>{1, 0});
  write_binary(dir / "bin.png", bin);
  CHECK(read_binary(dir / "bin.png") == bin);
  CHECK_THROWS_AS(read_gray(dir / "nope.png"), DataError);
  std::ofstream(dir / "junk.png") << "not an image";
  CHECK_THROWS_AS(read_gray(dir / "junk.png"), DataError);
}

TEST_CASE("manifest paths resolve relative to the manifest and missing files are listed") {
  oracle::TempDir dir("manifest");
  std::filesystem::create_directories(dir.path / "img");
  write_gray8(dir / "img/a.png", 2, 2, {0, 1, 2, 3});
  write_gray8(dir / "img/a_gt.png", 2, 2, {0, 255, 0, 255});
  std::ofstream(dir / "m.json") << R"({"name":"toy","entries":[{"image":"img/a.png","ground_truth":"img/a_gt.png"}]})";
  const DatasetManifest m = load_manifest(dir / "m.json");
  REQUIRE(m.entries.size() == 1);
  CHECK(m.entries[0].stem() == "a");
  CHECK(std::filesystem::exists(m.entries[0].image));

  std::ofstream(dir / "bad.json")
      << R"({"entries":[{"image":"img/a.png","ground_truth":"img/gone.png","fov_mask":"img/gone_mask.png"}]})";
  try {
    load_manifest(dir / "bad.json");
    FAIL("expected a data error");
  } catch (const DataError& e) {
    const std::string what = e.what();
    CHECK(what.find("gone.png") != std::string::npos);
    CHECK(what.find("gone_mask.png") != std::string::npos);
  }
  std::ofstream(dir / "broken.json") << "{";
  CHECK_THROWS_AS(load_manifest(dir / "broken.json"), DataError);
}

TEST_CASE("synthetic bars") {
  const GrayImage proto = bar_prototype(21, 3, false);
  CHECK(proto(10, 0) == doctest::Approx(0.0));
  CHECK(proto(10, 20) == doctest::Approx(0.0));
  CHECK(proto(0, 10) == doctest::Approx(1.0));
  const GrayImage half = bar_prototype(21, 3, true);
  CHECK(half(10, 2) == doctest::Approx(0.0));  // the half bar extends upwards
  CHECK(half(10, 18) == doctest::Approx(1.0));
  const Sample s = synthetic_vessel_sample(64, 9);
  CHECK(s.gt.width() == 64);
  double vessels = 0;
  for (double v : s.gt.pixels()) vessels += v;
  CHECK(vessels > 0);
  CHECK(vessels < 64 * 64 / 2);
  CHECK(synthetic_vessel_sample(64, 9).image == s.image);
}
