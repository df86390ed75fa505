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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bcosfire/cli.hpp"
#include "bcosfire/cosfire.hpp"
#include "bcosfire/io.hpp"
#include "bcosfire/tune.hpp"
#include "oracles.hpp"
#include "toy_dataset.hpp"

using namespace bcosfire;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> csv_row(const std::string& text, const std::string& first) {
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind(first + ",", 0) == 0) {
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      return cells;
    }
  }
  return {};
}

const std::vector<std::string> kSmallFilters{"--sym", "2.5,6,1,0.1", "--asym", "2.2,8,1,0.1"};

} // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"segment", "--threads", "0", "--image", "x.png"}).code == 1);
  CHECK(run({"configure"}).code == 1);
  CHECK(run({"configure", "--synthetic", "full-bar"}).code == 1); // no output path
  CHECK(run({"segment", "--image", "a.png", "--threshold", "300"}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("configure writes prototype-derived configs") {
  oracle::TempDir dir("cli_configure");
  REQUIRE(run({"configure", "--synthetic", "full-bar", "-o", dir / "full.cfg"}).code == 0);
  REQUIRE(run({"configure", "--synthetic", "half-bar", "-o", dir / "half.cfg"}).code == 0);
  CHECK(load_config(dir / "full.cfg").points.size() == 5);
  CHECK(load_config(dir / "half.cfg").points.size() == 3);
  CHECK(load_config(dir / "half.cfg").kind == FilterKind::asymmetric);

  write_gray8(dir / "blank.png", 21, 21, std::vector<std::uint8_t>(21 * 21, 200));
  const Run blank = run({"configure", "--prototype", dir / "blank.png", "-o", dir / "blank.cfg"});
  CHECK(blank.code == 2);
  CHECK_FALSE(fs::exists(dir / "blank.cfg"));
}

TEST_CASE("segment, evaluate and roc on a toy dataset") {
  oracle::TempDir dir("cli_pipeline");
  const toy::Dataset d = toy::write_dataset(dir.path, 2, 48, true);
  std::vector<std::string> seg{"segment", "--manifest", d.manifest, "--out", dir / "seg", "--threshold", "30"};
  seg.insert(seg.end(), kSmallFilters.begin(), kSmallFilters.end());
  const Run s = run(seg);
  REQUIRE_MESSAGE(s.code == 0, s.err);
  for (const auto& stem : d.stems) {
    CHECK(fs::exists(dir / ("seg/" + stem + "_seg.png")));
    CHECK(fs::exists(dir / ("seg/" + stem + "_response.png")));
  }
  const Run e = run({"evaluate", "--manifest", d.manifest, "--seg-dir", dir / "seg"});
  REQUIRE_MESSAGE(e.code == 0, e.err);
  const auto mean = csv_row(slurp(dir / "seg/metrics.csv"), "mean");
  REQUIRE(mean.size() == 6);
  CHECK(std::stod(mean[1]) > 0.8); // AUC
  CHECK(std::stod(mean[2]) > 0.3); // MCC

  const Run r = run({"roc", "--manifest", d.manifest, "--response-dir", dir / "seg", "--out", dir / "roc", "--mark", "30"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(slurp(dir / "roc/roc.csv").rfind("threshold,fpr,tpr\n", 0) == 0);
  CHECK(slurp(dir / "roc/roc.svg").find("chosen-threshold") != std::string::npos);
}

TEST_CASE("evaluate scores perfect and empty segmentations") {
  oracle::TempDir dir("cli_eval");
  const toy::Dataset d = toy::write_dataset(dir.path, 2, 32);
  fs::create_directories(dir.path / "perfect");
  fs::create_directories(dir.path / "empty");
  for (const auto& stem : d.stems) {
    fs::copy_file(dir / ("data/" + stem + "_gt.png"), dir / ("perfect/" + stem + "_seg.png"));
    write_gray8(dir / ("empty/" + stem + "_seg.png"), 32, 32, std::vector<std::uint8_t>(32 * 32, 0));
  }
  REQUIRE(run({"evaluate", "--manifest", d.manifest, "--seg-dir", dir / "perfect"}).code == 0);
  const std::string perfect = slurp(dir / "perfect/metrics.csv");
  for (const auto& stem : d.stems) {
    const auto row = csv_row(perfect, stem);
    REQUIRE(row.size() == 6);
    for (int k = 2; k < 6; ++k) CHECK(std::stod(row[static_cast<std::size_t>(k)]) == 1.0);
  }
  REQUIRE(run({"evaluate", "--manifest", d.manifest, "--seg-dir", dir / "empty"}).code == 0);
  CHECK(std::stod(csv_row(slurp(dir / "empty/metrics.csv"), "mean")[4]) == 0.0);

  fs::remove(dir / ("perfect/" + d.stems[1] + "_seg.png"));
  const Run gap = run({"evaluate", "--manifest", d.manifest, "--seg-dir", dir / "perfect"});
  CHECK(gap.code == 2);
  CHECK(gap.err.find(d.stems[1] + "_seg.png") != std::string::npos);
}

TEST_CASE("segment refuses bad input without writing anything") {
  oracle::TempDir dir("cli_bad");
  const Run missing = run({"segment", "--image", dir / "absent.png", "--out", dir / "out"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("absent.png") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));

  const toy::Dataset d = toy::write_dataset(dir.path, 2, 32);
  write_gray8(dir / "data/toy1_fov.png", 10, 10, std::vector<std::uint8_t>(100, 255)); // wrong size
  const Run mismatch = run({"segment", "--manifest", d.manifest, "--out", dir / "out2"});
  CHECK(mismatch.code == 2);
  CHECK_FALSE(fs::exists(dir / "out2"));
}

TEST_CASE("tune outputs round-trip through segment") {
  oracle::TempDir dir("cli_tune");
  const toy::Dataset d = toy::write_dataset(dir.path, 4, 40);
  const Run t = run({"tune", "--manifest", d.manifest, "--space", d.space, "--seed", "3", "--out", dir / "tuned"});
  REQUIRE_MESSAGE(t.code == 0, t.err);
  for (const char* f : {"tuning.json", "symmetric.cfg", "asymmetric.cfg", "roc.csv", "roc.svg", "split.csv"})
    CHECK(fs::exists(dir / (std::string("tuned/") + f)));
  CHECK(slurp(dir / "tuned/roc.svg").find("chosen-threshold") != std::string::npos);

  const TunedPipeline tuned = parse_tuning_report(slurp(dir / "tuned/tuning.json"));
  const std::string thr = std::to_string(tuned.threshold);
  REQUIRE(run({"segment", "--manifest", d.manifest, "--tuning", dir / "tuned/tuning.json", "--out", dir / "a"}).code == 0);
  REQUIRE(run({"segment", "--manifest", d.manifest, "--sym-config", dir / "tuned/symmetric.cfg", "--asym-config",
               dir / "tuned/asymmetric.cfg", "--threshold", thr, "--out", dir / "b"})
              .code == 0);

  // In-process reference for the first image.
  const DatasetManifest m = load_manifest(d.manifest);
  const Sample s = load_sample(m.entries[0], {}, OdMode::exclude);
  const GrayImage response = pipeline_response(s, tuned.symmetric, tuned.asymmetric);
  const GrayImage seg = threshold_response(response, s.mask, tuned.threshold);
  for (const char* out : {"a", "b"}) {
    CHECK(read_binary(dir / (std::string(out) + "/" + d.stems[0] + "_seg.png")) == seg);
    CHECK(slurp(dir / (std::string(out) + "/" + d.stems[0] + "_seg.png")) ==
          slurp(dir / ("a/" + d.stems[0] + "_seg.png")));
  }

  const Run odd = run({"tune", "--manifest", d.manifest, "--space", dir / "nope.json", "--out", dir / "x"});
  CHECK(odd.code == 2);
}

TEST_CASE("sensitivity writes one row per offset") {
  oracle::TempDir dir("cli_sens");
  const toy::Dataset d = toy::write_dataset(dir.path, 3, 32);
  std::vector<std::string> args{"sensitivity", "--manifest", d.manifest, "--param", "sigma0",
                                "--offsets", "-2,0,0.2",  "-o",         dir / "s.csv", "--threshold", "30"};
  args.insert(args.end(), kSmallFilters.begin(), kSmallFilters.end());
  const Run r = run(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const std::string csv = slurp(dir / "s.csv");
  CHECK(csv.rfind("offset,value,status,t,df,significant\n", 0) == 0);
  CHECK(csv_row(csv, "-2.00")[2] == "invalid");
  CHECK(csv_row(csv, "0.00")[2] == "skipped");
  CHECK(csv_row(csv, "0.20")[2] == "ok");
  CHECK(csv_row(csv, "0.20")[4] == "2");
  CHECK(run({"sensitivity", "--manifest", d.manifest, "--param", "rho"}).code == 1);
}
