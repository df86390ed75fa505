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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bcosfire/image.hpp"

namespace bcosfire {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Counts over mask pixels. pred and gt must hold only 0 and 1.
ConfusionMatrix confusion(const GrayImage& pred, const GrayImage& gt, const Mask& mask);

/// Matthews correlation coefficient; 0 when any marginal is empty.
double mcc(const ConfusionMatrix& cm);

struct BasicMetrics {
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
};

/// Throws UndefinedMetric naming the first metric with a zero denominator.
BasicMetrics basic_metrics(const ConfusionMatrix& cm);

struct RocPoint {
  int threshold = 0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
};

/// Confusion matrices of one normalized response at every integer threshold
/// 0..255 (pixel positive iff response > t), from a single pass.
std::vector<ConfusionMatrix> threshold_sweep(const GrayImage& response, const GrayImage& gt, const Mask& mask);

/// Macro-averaged ROC over images: per threshold, the mean of the per-image
/// TPR and FPR. Images without positives (negatives) are left out of the
/// TPR (FPR) average.
RocCurve roc(std::span<const GrayImage> responses, std::span<const GrayImage> gts, std::span<const Mask> masks);

/// Same averaging applied to precomputed sweeps.
RocCurve roc_from_sweeps(std::span<const std::vector<ConfusionMatrix>> sweeps);

/// Trapezoidal area under TPR(FPR), closed at (0,0) and (1,1).
double auc(const RocCurve& curve);

/// `threshold,fpr,tpr` with 6-decimal fixed point.
void write_roc_csv(std::ostream& out, const RocCurve& curve);

/// Minimal standalone SVG plot, optionally marking one threshold.
std::string roc_svg(const RocCurve& curve, int marked_threshold = -1);

struct TTestResult {
  double t = 0.0;
  int df = 0;
  double p_value = 1.0;
  bool significant = false;
};

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Student t cumulative distribution.
double student_t_cdf(double t, int df);

/// Two-tailed critical |t| for the given significance level.
double t_critical(int df, double alpha = 0.05);

/// Two-tailed paired test on d = a - b at p = 0.05. Zero variance gives
/// t = 0 (equal means) or +/-infinity.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

} // namespace bcosfire
