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

#include "bcosfire/tune.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "bcosfire/error.hpp"
#include "bcosfire/parallel.hpp"

namespace bcosfire {

namespace {

using json = nlohmann::json;

// Offsets are applied in steps of 0.1; drop the binary noise of the sum.
double snap(double v) { return std::round(v * 1e9) / 1e9; }

double mean_mcc_at(std::span<const std::vector<ConfusionMatrix>> sweeps, int t) {
  double sum = 0.0;
  for (const auto& sweep : sweeps) {
    sum += mcc(sweep[static_cast<std::size_t>(t)]);
  }
  return sum / static_cast<double>(sweeps.size());
}

bool better(const CellScore& a, const CellScore& b) {
  if (a.mean_mcc != b.mean_mcc) {
    return a.mean_mcc > b.mean_mcc;
  }
  if (a.threshold != b.threshold) {
    return a.threshold < b.threshold;
  }
  return a.params.key() < b.params.key();
}

void require_samples(std::span<const Sample> samples) {
  if (samples.empty()) {
    throw InvalidParameter("need at least one sample");
  }
  for (const Sample& s : samples) {
    if (!s.image.same_shape(s.gt) || !s.mask.same_shape(s.image) || !s.evaluation_mask().same_shape(s.image)) {
      throw DimensionMismatch("sample '" + s.name + "' has mismatched image, ground truth and mask");
    }
  }
}

std::vector<double> read_list(const json& section, const char* key, bool required) {
  if (!section.contains(key)) {
    if (required) {
      throw DataError(std::string("search space is missing '") + key + "'");
    }
    return {};
  }
  return section.at(key).get<std::vector<double>>();
}

SearchSpace read_space(const json& section, bool sigma_required) {
  SearchSpace space;
  space.sigma = read_list(section, "sigma", sigma_required);
  space.rho_max = read_list(section, "rho_max", true);
  space.sigma0 = read_list(section, "sigma0", true);
  space.alpha = read_list(section, "alpha", true);
  space.rho_step = section.value("rho_step", 2.0);
  return space;
}

json params_json(const FilterParams& p) {
  return {{"sigma", p.sigma}, {"rho_max", p.rho_max}, {"sigma0", p.sigma0}, {"alpha", p.alpha}, {"rho_step", p.rho_step}};
}

FilterParams params_from_json(const json& j) {
  FilterParams p;
  p.sigma = j.at("sigma").get<double>();
  p.rho_max = j.at("rho_max").get<double>();
  p.sigma0 = j.at("sigma0").get<double>();
  p.alpha = j.at("alpha").get<double>();
  p.rho_step = j.value("rho_step", 2.0);
  return p;
}

json result_json(const TuningResult& r) {
  json cells = json::array();
  for (const CellScore& c : r.cells) {
    json row = params_json(c.params);
    row["threshold"] = c.threshold;
    row["mean_mcc"] = c.mean_mcc;
    cells.push_back(row);
  }
  return {{"kind", to_string(r.kind)},
          {"params", params_json(r.best)},
          {"threshold", r.best_threshold},
          {"mean_mcc", r.best_mean_mcc},
          {"auc", auc(r.roc)},
          {"cells", cells}};
}

} // namespace

FilterConfig build_config(const FilterParams& p, FilterKind kind) {
  return kind == FilterKind::symmetric ? analytic_symmetric(p.sigma, p.rho_max, p.rho_step, p.sigma0, p.alpha)
                                       : analytic_asymmetric(p.sigma, p.rho_max, p.rho_step, p.sigma0, p.alpha);
}

std::vector<FilterParams> SearchSpace::cells() const {
  std::vector<FilterParams> out;
  out.reserve(cell_count());
  for (double s : sigma) {
    for (double r : rho_max) {
      for (double s0 : sigma0) {
        for (double a : alpha) {
          out.push_back({s, r, s0, a, rho_step});
        }
      }
    }
  }
  return out;
}

std::vector<double> asymmetric_sigma_range(double symmetric_sigma) {
  std::vector<double> out;
  for (int k = 1; k <= 6; ++k) {
    const double s = snap(symmetric_sigma - 0.1 * k);
    if (s > 0.0) {
      out.push_back(s);
    }
  }
  return out;
}

std::vector<std::size_t> shuffled_indices(std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) {
    order[i] = i;
  }
  std::mt19937_64 rng(seed);
  for (std::size_t i = count; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

CellScore best_threshold(std::span<const std::vector<ConfusionMatrix>> sweeps) {
  CellScore best;
  best.mean_mcc = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < 256; ++t) {
    const double m = mean_mcc_at(sweeps, t);
    if (m > best.mean_mcc) {
      best.mean_mcc = m;
      best.threshold = t;
    }
  }
  return best;
}

TuningResult grid_search(std::span<const Sample> train, const SearchSpace& space, FilterKind kind,
                         const std::optional<FilterParams>& fixed_symmetric, int threads) {
  require_samples(train);
  if (space.cell_count() == 0) {
    throw InvalidParameter("empty search space");
  }
  if (kind == FilterKind::asymmetric && !fixed_symmetric) {
    throw InvalidParameter("asymmetric search needs the fixed symmetric parameters");
  }
  const std::vector<FilterParams> cells = space.cells();
  std::vector<OrientationBank> banks;
  banks.reserve(cells.size());
  for (const FilterParams& p : cells) {
    banks.push_back(make_bank(build_config(p, kind)));
  }
  std::optional<OrientationBank> fixed_bank;
  if (kind == FilterKind::asymmetric) {
    fixed_bank = make_bank(build_config(*fixed_symmetric, FilterKind::symmetric));
  }

  // Visit cells so that those sharing (sigma, sigma0, alpha) are adjacent;
  // their blurred maps are reused across rho_max.
  std::vector<std::size_t> order(cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(cells[a].sigma, cells[a].sigma0, cells[a].alpha) <
           std::tie(cells[b].sigma, cells[b].sigma0, cells[b].alpha);
  });

  // sweeps[cell][image]
  std::vector<std::vector<std::vector<ConfusionMatrix>>> sweeps(
      cells.size(), std::vector<std::vector<ConfusionMatrix>>(train.size()));
  parallel_for(static_cast<int>(train.size()), threads, [&](int i0, int i1) {
    for (int i = i0; i < i1; ++i) {
      const Sample& s = train[static_cast<std::size_t>(i)];
      std::optional<GrayImage> fixed_response;
      if (fixed_bank) {
        ResponseCache fixed_cache(s.image);
        fixed_response = apply_filter(fixed_cache, *fixed_bank);
      }
      ResponseCache cache(s.image);
      const FilterParams* group = nullptr;
      for (std::size_t c : order) {
        const FilterParams& p = cells[c];
        if (group && std::tie(group->sigma, group->sigma0, group->alpha) != std::tie(p.sigma, p.sigma0, p.alpha)) {
          cache.clear();
        }
        group = &p;
        GrayImage raw = apply_filter(cache, banks[c]);
        if (fixed_response) {
          GrayImage sum = *fixed_response;
          auto dst = sum.pixels();
          auto add = raw.pixels();
          for (std::size_t k = 0; k < dst.size(); ++k) {
            dst[k] += add[k];
          }
          raw = std::move(sum);
        }
        sweeps[c][static_cast<std::size_t>(i)] = threshold_sweep(normalized_response(raw, s.mask), s.gt, s.evaluation_mask());
      }
    }
  });

  TuningResult result;
  result.kind = kind;
  std::size_t winner = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellScore score = best_threshold(sweeps[c]);
    score.params = cells[c];
    result.cells.push_back(score);
    if (c == 0 || better(score, result.cells[winner])) {
      winner = c;
    }
  }
  result.best = result.cells[winner].params;
  result.best_threshold = result.cells[winner].threshold;
  result.best_mean_mcc = result.cells[winner].mean_mcc;
  result.roc = roc_from_sweeps(sweeps[winner]);
  return result;
}

GrayImage pipeline_response(const Sample& sample, const FilterParams& sym, const std::optional<FilterParams>& asym,
                            int threads) {
  const OrientationBank sym_bank = make_bank(build_config(sym, FilterKind::symmetric));
  std::optional<OrientationBank> asym_bank;
  if (asym) {
    asym_bank = make_bank(build_config(*asym, FilterKind::asymmetric));
  }
  const GrayImage raw =
      combined_response(sample.image, sym_bank, asym_bank ? &*asym_bank : nullptr, {true, threads});
  return normalized_response(raw, sample.mask);
}

std::vector<double> per_image_mcc(std::span<const Sample> samples, const FilterParams& sym,
                                  const std::optional<FilterParams>& asym, int threshold, int threads) {
  require_samples(samples);
  std::vector<double> out(samples.size());
  parallel_for(static_cast<int>(samples.size()), threads, [&](int i0, int i1) {
    for (int i = i0; i < i1; ++i) {
      const Sample& s = samples[static_cast<std::size_t>(i)];
      const GrayImage seg = threshold_response(pipeline_response(s, sym, asym), s.mask, threshold);
      out[static_cast<std::size_t>(i)] = mcc(confusion(seg, s.gt, s.evaluation_mask()));
    }
  });
  return out;
}

std::string to_string(SensitivityParam param) {
  switch (param) {
  case SensitivityParam::sigma0:
    return "sigma0";
  case SensitivityParam::sigma:
    return "sigma";
  case SensitivityParam::alpha:
    return "alpha";
  }
  return "?";
}

SensitivityParam parse_sensitivity_param(const std::string& text) {
  if (text == "sigma0") return SensitivityParam::sigma0;
  if (text == "sigma") return SensitivityParam::sigma;
  if (text == "alpha") return SensitivityParam::alpha;
  throw InvalidParameter("unknown parameter '" + text + "' (expected sigma0, sigma or alpha)");
}

std::vector<SensitivityRow> sensitivity_experiment(std::span<const Sample> samples, const FilterParams& optimal_sym,
                                                   const std::optional<FilterParams>& asym, int threshold,
                                                   std::span<const double> offsets, SensitivityParam param,
                                                   int threads) {
  require_samples(samples);
  if (samples.size() < 2) {
    throw InvalidParameter("sensitivity experiment needs at least two images");
  }
  const std::vector<double> optimal = per_image_mcc(samples, optimal_sym, asym, threshold, threads);
  std::vector<SensitivityRow> rows;
  for (double offset : offsets) {
    SensitivityRow row;
    row.offset = offset;
    FilterParams p = optimal_sym;
    double& target = param == SensitivityParam::sigma0 ? p.sigma0 : param == SensitivityParam::sigma ? p.sigma : p.alpha;
    row.value = snap(target + offset);
    if (std::fabs(offset) < 1e-12) {
      row.status = SensitivityRow::Status::skipped;
      rows.push_back(row);
      continue;
    }
    // alpha = 0 is a valid (non-growing) blur; the scales must stay positive.
    const bool valid = param == SensitivityParam::alpha ? row.value >= 0.0 : row.value > 0.0;
    if (!valid) {
      row.status = SensitivityRow::Status::invalid;
      rows.push_back(row);
      continue;
    }
    target = row.value;
    const std::vector<double> perturbed = per_image_mcc(samples, p, asym, threshold, threads);
    row.test = paired_t_test(optimal, perturbed);
    rows.push_back(row);
  }
  return rows;
}

TuningPlan parse_tuning_plan(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw DataError(std::string("search space is not valid JSON: ") + e.what());
  }
  try {
    TuningPlan plan;
    plan.symmetric = read_space(doc.at("symmetric"), true);
    if (doc.contains("asymmetric")) {
      plan.asymmetric = read_space(doc.at("asymmetric"), false);
    } else {
      plan.asymmetric = plan.symmetric;
      plan.asymmetric.sigma.clear();
    }
    return plan;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed search space: ") + e.what());
  }
}

std::string tuning_report_json(const TuningResult& symmetric, const std::optional<TuningResult>& asymmetric) {
  json doc;
  doc["symmetric"] = result_json(symmetric);
  if (asymmetric) {
    doc["asymmetric"] = result_json(*asymmetric);
  }
  const TuningResult& last = asymmetric ? *asymmetric : symmetric;
  doc["threshold"] = last.best_threshold;
  doc["mean_mcc"] = last.best_mean_mcc;
  return doc.dump(2) + "\n";
}

TunedPipeline parse_tuning_report(const std::string& json_text) {
  try {
    const json doc = json::parse(json_text);
    TunedPipeline out;
    out.symmetric = params_from_json(doc.at("symmetric").at("params"));
    if (doc.contains("asymmetric")) {
      out.asymmetric = params_from_json(doc.at("asymmetric").at("params"));
    }
    out.threshold = doc.at("threshold").get<int>();
    return out;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed tuning report: ") + e.what());
  }
}

} // namespace bcosfire
