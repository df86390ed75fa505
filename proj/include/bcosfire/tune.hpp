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
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bcosfire/cosfire.hpp"
#include "bcosfire/error.hpp"
#include "bcosfire/eval.hpp"
#include "bcosfire/image.hpp"

namespace bcosfire {

/// The four tunable values of one analytic bar filter.
struct FilterParams {
  double sigma = 0.0;
  double rho_max = 0.0;
  double sigma0 = 0.0;
  double alpha = 0.0;
  double rho_step = 2.0;

  auto key() const { return std::make_tuple(sigma, rho_max, sigma0, alpha); }
  friend bool operator==(const FilterParams&, const FilterParams&) = default;
};

FilterConfig build_config(const FilterParams& params, FilterKind kind);

struct SearchSpace {
  std::vector<double> sigma;
  std::vector<double> rho_max;
  std::vector<double> sigma0;
  std::vector<double> alpha;
  double rho_step = 2.0;

  std::size_t cell_count() const noexcept { return sigma.size() * rho_max.size() * sigma0.size() * alpha.size(); }
  /// Cells in lexicographic (sigma, rho_max, sigma0, alpha) order.
  std::vector<FilterParams> cells() const;
};

/// sigma_s - 0.1, sigma_s - 0.2, ..., sigma_s - 0.6, keeping positive values.
std::vector<double> asymmetric_sigma_range(double symmetric_sigma);

/// A preprocessed image with its binary ground truth. Pixels outside `mask`
/// are never vessel; `eval_mask` (when set) selects the pixels counted in
/// confusion matrices and defaults to `mask`.
struct Sample {
  std::string name;
  GrayImage image;
  GrayImage gt;
  Mask mask;
  Mask eval_mask;

  const Mask& evaluation_mask() const noexcept { return eval_mask.size() != 0 ? eval_mask : mask; }
};

/// Deterministic Fisher-Yates permutation of 0..count-1 driven by mt19937_64.
std::vector<std::size_t> shuffled_indices(std::size_t count, std::uint64_t seed);

/// Shuffles by seed, first half train, second half validation.
template <class T>
std::pair<std::vector<T>, std::vector<T>> split_dataset(std::span<const T> items, std::uint64_t seed);

struct CellScore {
  FilterParams params;
  int threshold = 0;
  double mean_mcc = 0.0;
};

struct TuningResult {
  FilterKind kind = FilterKind::symmetric;
  FilterParams best;
  int best_threshold = 0;
  double best_mean_mcc = 0.0;
  RocCurve roc;
  std::vector<CellScore> cells;
};

/// Best threshold of a list of per-image sweeps by mean MCC (lowest
/// threshold on ties).
CellScore best_threshold(std::span<const std::vector<ConfusionMatrix>> sweeps);

/// Exhaustive search maximizing mean MCC over cells and the 256 integer
/// thresholds. With kind == asymmetric, `fixed_symmetric` must be set and
/// the objective is the summed symmetric + asymmetric response.
TuningResult grid_search(std::span<const Sample> train, const SearchSpace& space, FilterKind kind,
                         const std::optional<FilterParams>& fixed_symmetric = std::nullopt, int threads = 1);

/// Normalized r_s (+ r_a) for one sample.
GrayImage pipeline_response(const Sample& sample, const FilterParams& sym, const std::optional<FilterParams>& asym,
                            int threads = 1);

/// MCC of every sample segmented at `threshold`.
std::vector<double> per_image_mcc(std::span<const Sample> samples, const FilterParams& sym,
                                  const std::optional<FilterParams>& asym, int threshold, int threads = 1);

enum class SensitivityParam { sigma0, sigma, alpha };
std::string to_string(SensitivityParam param);
SensitivityParam parse_sensitivity_param(const std::string& text);

struct SensitivityRow {
  enum class Status { ok, skipped, invalid };
  double offset = 0.0;
  double value = 0.0;
  Status status = Status::ok;
  TTestResult test;
};

/// Perturbs one symmetric-filter parameter by each offset and compares the
/// per-image MCCs with the optimal ones (d = optimal - perturbed).
std::vector<SensitivityRow> sensitivity_experiment(std::span<const Sample> samples, const FilterParams& optimal_sym,
                                                   const std::optional<FilterParams>& asym, int threshold,
                                                   std::span<const double> offsets, SensitivityParam param,
                                                   int threads = 1);

/// Search spaces of the sequential procedure. An empty asymmetric sigma list
/// is filled from asymmetric_sigma_range once the symmetric sigma is known.
struct TuningPlan {
  SearchSpace symmetric;
  SearchSpace asymmetric;
};

/// {"symmetric": {"sigma": [...], "rho_max": [...], "sigma0": [...],
///  "alpha": [...], "rho_step": 2}, "asymmetric": {...}}
TuningPlan parse_tuning_plan(const std::string& json_text);

/// Chosen parameters, threshold, mean MCC and the per-cell score table.
std::string tuning_report_json(const TuningResult& symmetric, const std::optional<TuningResult>& asymmetric);

struct TunedPipeline {
  FilterParams symmetric;
  std::optional<FilterParams> asymmetric;
  int threshold = 0;
};

/// Reads back the parameters and final threshold of a tuning report.
TunedPipeline parse_tuning_report(const std::string& json_text);

// ---------------------------------------------------------------------------

template <class T>
std::pair<std::vector<T>, std::vector<T>> split_dataset(std::span<const T> items, std::uint64_t seed) {
  if (items.empty() || items.size() % 2 != 0) {
    throw InvalidParameter("dataset split needs a non-empty, even number of items, got " +
                           std::to_string(items.size()));
  }
  const auto order = shuffled_indices(items.size(), seed);
  std::pair<std::vector<T>, std::vector<T>> out;
  const std::size_t half = items.size() / 2;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < half ? out.first : out.second).push_back(items[order[i]]);
  }
  return out;
}

} // namespace bcosfire
