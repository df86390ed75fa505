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

// Acceptance suite: prints one PASS/FAIL/SKIP line per criterion and exits
// non-zero if any criterion fails.

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bcosfire/cli.hpp"
#include "bcosfire/cosfire.hpp"
#include "bcosfire/eval.hpp"
#include "bcosfire/io.hpp"
#include "bcosfire/preprocess.hpp"
#include "bcosfire/synthetic.hpp"
#include "bcosfire/tune.hpp"
#include "toy_dataset.hpp"

using namespace bcosfire;
using std::numbers::pi;
using Clock = std::chrono::steady_clock;

namespace {

enum class Verdict { pass, fail, skip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {Verdict::fail, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  const char* tag = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::fail ? "FAIL" : "SKIPPED";
  if (o.verdict == Verdict::fail) ++failures;
  std::printf("[%s] AC%d %s: %s (%.2fs)\n", tag, id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double gap_deg(double a, double b) {
  const double d = std::fmod(std::fabs(a - b), 2 * pi);
  return std::min(d, 2 * pi - d) * 180 / pi;
}

GrayImage random_image(int w, int h, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  GrayImage g(w, h);
  for (double& v : g.pixels()) v = u(rng);
  return g;
}

GrayImage random_binary(int w, int h, std::mt19937_64& rng, double p) {
  std::bernoulli_distribution b(p);
  GrayImage g(w, h);
  for (double& v : g.pixels()) v = b(rng) ? 1 : 0;
  return g;
}

Outcome ac1() {
  const auto t0 = Clock::now();
  const std::vector<double> radii{0, 2, 4};
  const FilterConfig full = configure_from_prototype(bar_prototype(101, 3, false), {50, 50}, radii, 2.5);
  const FilterConfig half = configure_from_prototype(bar_prototype(101, 3, true), {50, 50}, radii, 2.5);
  const double secs = seconds_since(t0);
  const bool ok = full.points.size() == 5 && half.points.size() == 3 && secs < 1.0;
  return {ok ? Verdict::pass : Verdict::fail,
          fmt("full |S|=%zu, half |S|=%zu, %.3fs", full.points.size(), half.points.size(), secs)};
}

Outcome ac2() {
  const auto t0 = Clock::now();
  std::vector<double> radii;
  for (int r = 0; r <= 20; r += 2) radii.push_back(r);
  double worst = 0;
  bool same_size = true;
  for (bool half : {false, true}) {
    const FilterConfig learned = configure_from_prototype(bar_prototype(101, 3, half), {50, 50}, radii, 2.5);
    const FilterConfig analytic = half ? analytic_asymmetric(2.5, 20, 2, 1, 0) : analytic_symmetric(2.5, 20, 2, 1, 0);
    same_size = same_size && learned.points.size() == analytic.points.size();
    for (const FilterPoint& a : analytic.points) {
      double nearest = 360;
      for (const FilterPoint& l : learned.points)
        if (l.rho == a.rho) nearest = std::min(nearest, a.rho == 0 ? 0.0 : gap_deg(l.phi, a.phi));
      worst = std::max(worst, nearest);
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = same_size && worst < 1.0 && secs < 5.0;
  return {ok ? Verdict::pass : Verdict::fail,
          fmt("cardinality %s, worst angle gap %.3f deg", same_size ? "equal" : "differs", worst)};
}

Outcome ac3() {
  const auto t0 = Clock::now();
  const OrientationBank bank = make_bank(analytic_symmetric(4.8, 20, 2, 3, 0.3));
  const int n = 256;
  std::vector<double> peaks;
  for (int k = 0; k < 12; ++k) {
    BarSpec bar{n / 2.0, n / 2.0, pi / 2 + k * pi / 12, 3.0, false, 0.0};
    const GrayImage r = apply_filter(render_bars(n, n, std::span(&bar, 1)), bank);
    double best = 0;
    for (int y = n / 4; y < 3 * n / 4; ++y)
      for (int x = n / 4; x < 3 * n / 4; ++x) best = std::max(best, r(x, y));
    peaks.push_back(best);
  }
  double worst = 0;
  for (double p : peaks) worst = std::max(worst, std::fabs(p - peaks[0]) / peaks[0]);
  const double secs = seconds_since(t0);
  const bool ok = peaks[0] > 0 && worst < 0.05 && secs < 30;
  return {ok ? Verdict::pass : Verdict::fail, fmt("worst relative deviation %.2f%%", 100 * worst)};
}

Outcome ac4() {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> count(1, 10);
  std::uniform_real_distribution<double> rho(0.5, 20);
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int m = count(rng);
    std::vector<FilterPoint> pts{{1, 0, 0}};
    for (int i = 1; i < m; ++i) pts.push_back({1, rho(rng), 0});
    std::vector<GrayImage> imgs;
    for (int i = 0; i < m; ++i) imgs.push_back(random_image(16, 16, rng, 0.0, 1.0));
    const WeightScheme w = WeightScheme::for_points(pts);
    const GrayImage got = combine_responses(imgs, w);
    double wsum = 0;
    for (double o : w.omega) wsum += o;
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        double prod = 1;
        for (int i = 0; i < m; ++i) prod *= std::pow(imgs[static_cast<std::size_t>(i)](x, y), w.omega[static_cast<std::size_t>(i)]);
        worst = std::max(worst, std::fabs(got(x, y) - std::pow(prod, 1 / wsum)));
      }
  }
  return {worst < 1e-9 ? Verdict::pass : Verdict::fail, fmt("max abs diff %.3g over 50 instances", worst)};
}

Outcome ac5() {
  std::mt19937_64 rng(5);
  double worst = 0;
  bool monotone = true;
  for (int trial = 0; trial < 100; ++trial) {
    const GrayImage gt = random_binary(32, 32, rng, 0.25);
    const GrayImage pred = random_binary(32, 32, rng, 0.3);
    const Mask mask(32, 32);
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const bool p = pred.pixels()[i] == 1, g = gt.pixels()[i] == 1;
      (p ? (g ? tp : fp) : (g ? fn : tn)) += 1;
    }
    const ConfusionMatrix cm = confusion(pred, gt, mask);
    const BasicMetrics b = basic_metrics(cm);
    const double ref_mcc = (tp * tn - fp * fn) / std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
    worst = std::max({worst, std::fabs(mcc(cm) - ref_mcc), std::fabs(b.accuracy - (tp + tn) / (tp + fp + fn + tn)),
                      std::fabs(b.sensitivity - tp / (tp + fn)), std::fabs(b.specificity - tn / (tn + fp))});

    // Integer-valued responses: the trapezoid through every cut point equals
    // the pairwise ranking probability.
    GrayImage resp(32, 32);
    std::uniform_int_distribution<int> level(0, 255);
    for (std::size_t i = 0; i < resp.size(); ++i)
      resp.pixels()[i] = std::min(255, level(rng) + (gt.pixels()[i] == 1 ? 60 : 0));
    std::vector<double> pos, neg;
    for (std::size_t i = 0; i < resp.size(); ++i) (gt.pixels()[i] == 1 ? pos : neg).push_back(resp.pixels()[i]);
    double wins = 0;
    for (double p : pos)
      for (double q : neg) wins += p > q ? 1 : p == q ? 0.5 : 0;
    const GrayImage rs[] = {resp};
    const GrayImage gs[] = {gt};
    const Mask ms[] = {mask};
    const RocCurve curve = roc(rs, gs, ms);
    worst = std::max(worst, std::fabs(auc(curve) - wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()))));
    for (std::size_t i = 1; i < curve.points.size(); ++i)
      monotone = monotone && curve.points[i].fpr <= curve.points[i - 1].fpr && curve.points[i].tpr <= curve.points[i - 1].tpr;
  }
  const bool ok = worst < 1e-12 && monotone;
  return {ok ? Verdict::pass : Verdict::fail, fmt("max abs diff %.3g, ROC monotone: %s", worst, monotone ? "yes" : "no")};
}

Outcome ac6() {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z(0, 1);
  double worst_t = 0, worst_p = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = trial % 2 ? 30 : 5;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      b[i] = 0.7 + 0.05 * z(rng);
      a[i] = b[i] + 0.01 * (trial % 4) + 0.02 * z(rng);
    }
    double mean = 0, ss = 0;
    for (std::size_t i = 0; i < n; ++i) mean += (a[i] - b[i]) / n;
    for (std::size_t i = 0; i < n; ++i) ss += std::pow(a[i] - b[i] - mean, 2);
    const double t = mean / std::sqrt(ss / (n - 1) / n);
    const boost::math::students_t dist(static_cast<double>(n - 1));
    const double p = 2 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
    const TTestResult r = paired_t_test(a, b);
    worst_t = std::max(worst_t, std::fabs(r.t - t));
    worst_p = std::max(worst_p, std::fabs(r.p_value - p));
  }
  const double crit = t_critical(29);
  const double ref_crit = boost::math::quantile(boost::math::students_t(29.0), 0.975);
  const bool ok = worst_t < 1e-6 && worst_p < 1e-9 && std::fabs(crit - ref_crit) < 1e-6 && std::fabs(crit - 2.045) < 1e-3;
  return {ok ? Verdict::pass : Verdict::fail,
          fmt("max |dt| %.3g, max |dp| %.3g, t_crit(29)=%.4f", worst_t, worst_p, crit)};
}

Outcome ac7() {
  const char* manifest_path = std::getenv("IOSTAR_MANIFEST");
  if (manifest_path == nullptr || *manifest_path == '\0') {
    return {Verdict::skip, "set IOSTAR_MANIFEST to a dataset manifest to run"};
  }
  const DatasetManifest manifest = load_manifest(manifest_path);
  const int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const FilterParams sym{4.8, 20, 3, 0.3, 2}, asym{4.4, 36, 1, 0.1, 2};
  std::vector<std::vector<ConfusionMatrix>> sweeps;
  double mcc_sum = 0, acc = 0, se = 0, sp = 0;
  for (const ManifestEntry& e : manifest.entries) {
    const Sample s = load_sample(e, {}, OdMode::exclude, threads);
    const GrayImage response = pipeline_response(s, sym, asym, threads);
    sweeps.push_back(threshold_sweep(response, s.gt, s.evaluation_mask()));
    const ConfusionMatrix cm = confusion(threshold_response(response, s.mask, 35), s.gt, s.evaluation_mask());
    const BasicMetrics b = basic_metrics(cm);
    mcc_sum += mcc(cm);
    acc += b.accuracy;
    se += b.sensitivity;
    sp += b.specificity;
  }
  const double n = static_cast<double>(manifest.entries.size());
  const double a = auc(roc_from_sweeps(sweeps));
  const double m = mcc_sum / n;
  acc /= n;
  se /= n;
  sp /= n;
  const bool ok = std::fabs(a - 0.9519) <= 0.02 && std::fabs(m - 0.6979) <= 0.03 && std::fabs(acc - 0.9419) <= 0.01 &&
                  std::fabs(se - 0.7705) <= 0.03 && std::fabs(sp - 0.9613) <= 0.01;
  return {ok ? Verdict::pass : Verdict::fail,
          fmt("AUC %.4f MCC %.4f Acc %.4f Se %.4f Sp %.4f over %zu images", a, m, acc, se, sp, manifest.entries.size())};
}

double time_segmentation(const RgbImage& rgb, const Mask& fov, int threads) {
  const OrientationBank sym = make_bank(analytic_symmetric(4.8, 20, 2, 3, 0.3));
  const OrientationBank asym = make_bank(analytic_asymmetric(4.4, 36, 2, 1, 0.1));
  const auto t0 = Clock::now();
  const GrayImage pre = preprocess(rgb, fov, {}, threads);
  const GrayImage seg = segment(pre, sym, asym, fov, 35, {true, threads});
  const double secs = seconds_since(t0);
  if (seg.width() != rgb.width()) std::abort();
  return secs;
}

Outcome ac8() {
  const int n = 1024;
  const Sample s = synthetic_vessel_sample(n, 8, 12);
  RgbImage rgb(n, n);
  Mask fov(n, n, 0);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const auto g = static_cast<std::uint8_t>(std::lround(std::clamp(s.image(x, y), 0.0, 1.0) * 255));
      rgb.set(x, y, g, g, g);
      fov(x, y) = std::hypot(x - 511.5, y - 511.5) < 500 ? 1 : 0;
    }
  const double one = time_segmentation(rgb, fov, 1);
  const double four = time_segmentation(rgb, fov, 4);
  const unsigned cores = std::thread::hardware_concurrency();
  const bool ok = one <= 10.0 && four <= 3.0;
  return {ok ? Verdict::pass : Verdict::fail,
          fmt("1 thread %.2fs (limit 10s), 4 threads %.2fs (limit 3s) on %u hardware thread(s)", one, four, cores)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome ac9() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / ("bcosfire_ac9_" + std::to_string(std::random_device{}()));
  const toy::Dataset d = toy::write_dataset(root, 4, 48);
  std::vector<std::vector<std::pair<std::string, std::string>>> runs;
  for (int r = 0; r < 3; ++r) {
    const fs::path out = root / ("run" + std::to_string(r));
    std::ostringstream sink;
    const int code = cli::run({"tune", "--manifest", d.manifest, "--space", d.space, "--seed", "17", "--out", out.string()},
                              sink, sink);
    if (code != 0) {
      fs::remove_all(root);
      return {Verdict::fail, "tune exited with " + std::to_string(code) + ": " + sink.str()};
    }
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& entry : fs::directory_iterator(out)) files.emplace_back(entry.path().filename().string(), slurp(entry.path()));
    std::sort(files.begin(), files.end());
    runs.push_back(std::move(files));
  }
  fs::remove_all(root);
  const bool ok = !runs[0].empty() && runs[0] == runs[1] && runs[1] == runs[2];
  return {ok ? Verdict::pass : Verdict::fail, fmt("%zu result files compared across 3 runs", runs[0].size())};
}

} // namespace

int main() {
  report(1, "configuration point counts", ac1);
  report(2, "analytic/prototype agreement", ac2);
  report(3, "rotation invariance", ac3);
  report(4, "combination oracle", ac4);
  report(5, "metric oracles", ac5);
  report(6, "t-test oracle", ac6);
  report(7, "dataset reproduction", ac7);
  report(8, "performance", ac8);
  report(9, "tuning determinism", ac9);
  return failures == 0 ? 0 : 1;
}
