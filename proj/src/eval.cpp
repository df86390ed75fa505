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

#include "bcosfire/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "bcosfire/error.hpp"

namespace bcosfire {

namespace {

constexpr int kLevels = 256;

bool is_binary(double v) { return v == 0.0 || v == 1.0; }

// Largest integer threshold t in [-1, 255] with response > t, i.e. the pixel
// is positive for thresholds 0..level.
int positive_up_to(double v) {
  if (!(v > 0.0)) {
    return -1;
  }
  return std::min(static_cast<int>(std::ceil(v)) - 1, kLevels - 1);
}

// Continued fraction for I_x(a,b), modified Lentz.
double beta_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) {
      break;
    }
  }
  return h;
}

std::string fixed6(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(6) << v;
  return s.str();
}

} // namespace

ConfusionMatrix confusion(const GrayImage& pred, const GrayImage& gt, const Mask& mask) {
  if (!pred.same_shape(gt) || !mask.same_shape(pred)) {
    throw DimensionMismatch("prediction, ground truth and mask must share dimensions");
  }
  ConfusionMatrix cm;
  auto p = pred.pixels();
  auto g = gt.pixels();
  auto m = mask.pixels();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!is_binary(p[i]) || !is_binary(g[i])) {
      throw InvalidParameter("confusion expects binary images (0/1 values)");
    }
    if (!m[i]) {
      continue;
    }
    const bool pv = p[i] == 1.0;
    const bool gv = g[i] == 1.0;
    if (pv && gv) {
      ++cm.tp;
    } else if (pv) {
      ++cm.fp;
    } else if (gv) {
      ++cm.fn;
    } else {
      ++cm.tn;
    }
  }
  return cm;
}

double mcc(const ConfusionMatrix& cm) {
  const double tp = static_cast<double>(cm.tp);
  const double fp = static_cast<double>(cm.fp);
  const double fn = static_cast<double>(cm.fn);
  const double tn = static_cast<double>(cm.tn);
  const double a = tp + fp, b = tp + fn, c = tn + fp, d = tn + fn;
  if (a == 0.0 || b == 0.0 || c == 0.0 || d == 0.0) {
    return 0.0;
  }
  return (tp * tn - fp * fn) / std::sqrt(a * b * c * d);
}

BasicMetrics basic_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) {
    throw UndefinedMetric("accuracy");
  }
  if (cm.tp + cm.fn == 0) {
    throw UndefinedMetric("sensitivity");
  }
  if (cm.tn + cm.fp == 0) {
    throw UndefinedMetric("specificity");
  }
  return {static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total()),
          static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn),
          static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp)};
}

std::vector<ConfusionMatrix> threshold_sweep(const GrayImage& response, const GrayImage& gt, const Mask& mask) {
  if (!response.same_shape(gt) || !mask.same_shape(response)) {
    throw DimensionMismatch("response, ground truth and mask must share dimensions");
  }
  // Histogram of the last threshold at which each pixel is still positive.
  std::vector<std::uint64_t> pos(kLevels + 1, 0), neg(kLevels + 1, 0);
  auto r = response.pixels();
  auto g = gt.pixels();
  auto m = mask.pixels();
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!is_binary(g[i])) {
      throw InvalidParameter("ground truth must be binary (0/1 values)");
    }
    if (!m[i]) {
      continue;
    }
    const auto bin = static_cast<std::size_t>(positive_up_to(r[i]) + 1);
    (g[i] == 1.0 ? pos : neg)[bin] += 1;
  }
  std::uint64_t total_pos = 0, total_neg = 0;
  for (int b = 0; b <= kLevels; ++b) {
    total_pos += pos[static_cast<std::size_t>(b)];
    total_neg += neg[static_cast<std::size_t>(b)];
  }
  std::vector<ConfusionMatrix> sweep(kLevels);
  std::uint64_t tp = 0, fp = 0;
  for (int t = kLevels - 1; t >= 0; --t) {
    // Positive at threshold t iff positive_up_to >= t, i.e. bin >= t + 1.
    tp += pos[static_cast<std::size_t>(t + 1)];
    fp += neg[static_cast<std::size_t>(t + 1)];
    sweep[static_cast<std::size_t>(t)] = {tp, fp, total_pos - tp, total_neg - fp};
  }
  return sweep;
}

RocCurve roc_from_sweeps(std::span<const std::vector<ConfusionMatrix>> sweeps) {
  if (sweeps.empty()) {
    throw InvalidParameter("ROC needs at least one image");
  }
  RocCurve curve;
  curve.points.reserve(kLevels);
  for (int t = 0; t < kLevels; ++t) {
    double tpr_sum = 0.0, fpr_sum = 0.0;
    int tpr_n = 0, fpr_n = 0;
    for (const auto& sweep : sweeps) {
      const ConfusionMatrix& cm = sweep.at(static_cast<std::size_t>(t));
      if (cm.tp + cm.fn > 0) {
        tpr_sum += static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
        ++tpr_n;
      }
      if (cm.fp + cm.tn > 0) {
        fpr_sum += static_cast<double>(cm.fp) / static_cast<double>(cm.fp + cm.tn);
        ++fpr_n;
      }
    }
    curve.points.push_back({t, fpr_n ? fpr_sum / fpr_n : 0.0, tpr_n ? tpr_sum / tpr_n : 0.0});
  }
  return curve;
}

RocCurve roc(std::span<const GrayImage> responses, std::span<const GrayImage> gts, std::span<const Mask> masks) {
  if (responses.empty()) {
    throw InvalidParameter("ROC needs at least one image");
  }
  if (responses.size() != gts.size() || responses.size() != masks.size()) {
    throw DimensionMismatch("responses, ground truths and masks must be aligned lists");
  }
  std::vector<std::vector<ConfusionMatrix>> sweeps;
  sweeps.reserve(responses.size());
  for (std::size_t i = 0; i < responses.size(); ++i) {
    sweeps.push_back(threshold_sweep(responses[i], gts[i], masks[i]));
  }
  return roc_from_sweeps(sweeps);
}

double auc(const RocCurve& curve) {
  if (curve.points.size() < 2) {
    throw InvalidParameter("AUC needs a curve with at least two points");
  }
  std::vector<std::pair<double, double>> pts;
  pts.reserve(curve.points.size() + 2);
  pts.emplace_back(0.0, 0.0);
  for (const RocPoint& p : curve.points) {
    pts.emplace_back(p.fpr, p.tpr);
  }
  pts.emplace_back(1.0, 1.0);
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 2.0;
  }
  return area;
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  out << "threshold,fpr,tpr\n";
  for (const RocPoint& p : curve.points) {
    out << p.threshold << ',' << fixed6(p.fpr) << ',' << fixed6(p.tpr) << '\n';
  }
}

std::string roc_svg(const RocCurve& curve, int marked_threshold) {
  constexpr double kSize = 400.0;
  constexpr double kMargin = 50.0;
  auto px = [&](double fpr) { return kMargin + fpr * kSize; };
  auto py = [&](double tpr) { return kMargin + (1.0 - tpr) * kSize; };
  std::ostringstream s;
  s << std::fixed << std::setprecision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize + 2 * kMargin << "\" height=\""
    << kSize + 2 * kMargin << "\">\n";
  s << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kSize << "\" height=\"" << kSize
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\"" << py(1)
    << "\" stroke=\"gray\" stroke-dasharray=\"4\"/>\n";
  s << "<polyline fill=\"none\" stroke=\"blue\" points=\"";
  std::vector<std::pair<double, double>> pts;
  for (const RocPoint& p : curve.points) {
    pts.emplace_back(p.fpr, p.tpr);
  }
  std::sort(pts.begin(), pts.end());
  for (const auto& [f, t] : pts) {
    s << px(f) << ',' << py(t) << ' ';
  }
  s << "\"/>\n";
  for (const RocPoint& p : curve.points) {
    if (p.threshold == marked_threshold) {
      s << "<rect class=\"chosen-threshold\" x=\"" << px(p.fpr) - 4 << "\" y=\"" << py(p.tpr) - 4
        << "\" width=\"8\" height=\"8\" fill=\"red\"><title>t=" << p.threshold << "</title></rect>\n";
    }
  }
  s << "<text x=\"" << kMargin + kSize / 2 << "\" y=\"" << kSize + 1.7 * kMargin
    << "\" text-anchor=\"middle\">FPR</text>\n";
  s << "<text x=\"" << kMargin / 3 << "\" y=\"" << kMargin + kSize / 2 << "\">TPR</text>\n";
  s << "<text x=\"" << kMargin + kSize / 2 << "\" y=\"" << kMargin / 2 << "\" text-anchor=\"middle\">AUC "
    << std::setprecision(4) << (curve.points.size() >= 2 ? auc(curve) : 0.0) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || x < 0.0 || x > 1.0) {
    throw InvalidParameter("incomplete beta needs a, b > 0 and x in [0, 1]");
  }
  if (x == 0.0 || x == 1.0) {
    return x;
  }
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, int df) {
  if (df < 1) {
    throw InvalidParameter("t distribution needs df >= 1");
  }
  if (std::isinf(t)) {
    return t > 0 ? 1.0 : 0.0;
  }
  const double nu = df;
  const double tail = 0.5 * incomplete_beta(nu / 2.0, 0.5, nu / (nu + t * t));
  return t >= 0.0 ? 1.0 - tail : tail;
}

double t_critical(int df, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidParameter("significance level must lie in (0, 1)");
  }
  // Two-tailed: solve 1 - cdf(t) = alpha / 2 by bisection.
  double lo = 0.0, hi = 1.0;
  while (1.0 - student_t_cdf(hi, df) > alpha / 2.0) {
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 - student_t_cdf(mid, df) > alpha / 2.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidParameter("paired t-test needs samples of equal length");
  }
  if (a.size() < 2) {
    throw InvalidParameter("paired t-test needs at least two pairs");
  }
  const auto n = a.size();
  std::vector<double> d(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = a[i] - b[i];
    mean += d[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : d) {
    ss += (v - mean) * (v - mean);
  }
  TTestResult r;
  r.df = static_cast<int>(n) - 1;
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) {
    if (mean == 0.0) {
      return r;
    }
    r.t = std::copysign(std::numeric_limits<double>::infinity(), mean);
    r.p_value = 0.0;
    r.significant = true;
    return r;
  }
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p_value = incomplete_beta(r.df / 2.0, 0.5, r.df / (r.df + r.t * r.t));
  r.significant = std::fabs(r.t) > t_critical(r.df, 0.05);
  return r;
}

} // namespace bcosfire
