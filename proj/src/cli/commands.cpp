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

#include "bcosfire/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "bcosfire/cosfire.hpp"
#include "bcosfire/error.hpp"
#include "bcosfire/eval.hpp"
#include "bcosfire/io.hpp"
#include "bcosfire/parallel.hpp"
#include "bcosfire/preprocess.hpp"
#include "bcosfire/synthetic.hpp"
#include "bcosfire/tune.hpp"

namespace bcosfire::cli {

namespace fs = std::filesystem;

namespace {

// Symmetric and asymmetric parameters tuned on IOSTAR.
const std::vector<double> kDefaultSymmetric{4.8, 20, 3, 0.3};
const std::vector<double> kDefaultAsymmetric{4.4, 36, 1, 0.1};
constexpr int kDefaultThreshold = 35;

struct CommonOptions {
  int threads = 1;
  PreprocessOptions preprocess;
  std::string od_mode = "exclude";
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--smooth-iterations", o.preprocess.smooth_iterations, "FOV border smoothing iterations")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--clahe-tiles-x", o.preprocess.clahe_tiles_x, "CLAHE tiles along x")->check(CLI::PositiveNumber);
  cmd->add_option("--clahe-tiles-y", o.preprocess.clahe_tiles_y, "CLAHE tiles along y")->check(CLI::PositiveNumber);
  cmd->add_option("--clahe-clip", o.preprocess.clahe_clip, "CLAHE clip limit in (0,1]")->check(CLI::Range(1e-9, 1.0));
  cmd->add_option("--od-mode", o.od_mode, "Optic-disc handling in evaluation")
      ->check(CLI::IsMember({"exclude", "force"}));
}

FilterParams params_from_list(const std::vector<double>& v, const std::string& flag) {
  if (v.size() != 4) {
    throw InvalidParameter(flag + " expects sigma,rho_max,sigma0,alpha");
  }
  return {v[0], v[1], v[2], v[3], 2.0};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot read " + path);
  }
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  out << text;
}

std::string fixed(double v, int digits = 6) {
  if (std::isnan(v)) {
    return "nan";
  }
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::vector<Sample> load_samples(const DatasetManifest& manifest, const CommonOptions& o) {
  const OdMode od = parse_od_mode(o.od_mode);
  std::vector<Sample> samples(manifest.entries.size());
  parallel_for(static_cast<int>(samples.size()), o.threads, [&](int i0, int i1) {
    for (int i = i0; i < i1; ++i) {
      samples[static_cast<std::size_t>(i)] = load_sample(manifest.entries[static_cast<std::size_t>(i)], o.preprocess, od);
    }
  });
  return samples;
}

// ---------------------------------------------------------------- configure

struct ConfigureArgs {
  std::string prototype;
  std::string synthetic;
  int size = 101;
  double bar_width = 3.0;
  std::vector<int> center;
  std::vector<double> radii{0, 2, 4};
  double sigma = 2.5;
  double peak_fraction = 0.2;
  double sigma0 = 1.0;
  double alpha = 0.0;
  std::string output;
};

int configure(const ConfigureArgs& a, std::ostream& out) {
  GrayImage proto;
  if (!a.prototype.empty()) {
    proto = read_gray(a.prototype);
  } else {
    proto = bar_prototype(a.size, a.bar_width, a.synthetic == "half-bar");
  }
  PixelPos center{proto.width() / 2, proto.height() / 2};
  if (a.center.size() == 2) {
    center = {a.center[0], a.center[1]};
  } else if (!a.center.empty()) {
    throw InvalidParameter("--center expects x,y");
  }
  PrototypeOptions opts;
  opts.peak_fraction = a.peak_fraction;
  opts.sigma0 = a.sigma0;
  opts.alpha = a.alpha;
  const FilterConfig config = configure_from_prototype(proto, center, a.radii, a.sigma, opts);
  save_config(a.output, config);
  out << "configured " << to_string(config.kind) << " filter with " << config.points.size() << " points -> "
      << a.output << "\n";
  return kOk;
}

// ------------------------------------------------------------------ segment

struct FilterSource {
  std::string tuning;
  std::string sym_config;
  std::string asym_config;
  std::vector<double> sym = kDefaultSymmetric;
  std::vector<double> asym = kDefaultAsymmetric;
  bool no_asym = false;
  std::optional<double> threshold;
};

void add_filter_source(CLI::App* cmd, FilterSource& f, bool allow_configs) {
  cmd->add_option("--tuning", f.tuning, "Tuning report (tuning.json) supplying parameters and threshold");
  if (allow_configs) {
    cmd->add_option("--sym-config", f.sym_config, "Symmetric filter config file");
    cmd->add_option("--asym-config", f.asym_config, "Asymmetric filter config file");
  }
  cmd->add_option("--sym", f.sym, "Symmetric sigma,rho_max,sigma0,alpha")->delimiter(',')->expected(4);
  cmd->add_option("--asym", f.asym, "Asymmetric sigma,rho_max,sigma0,alpha")->delimiter(',')->expected(4);
  cmd->add_flag("--no-asym", f.no_asym, "Use the symmetric filter alone");
  cmd->add_option("--threshold", f.threshold, "Threshold on the 0-255 response scale")->check(CLI::Range(0.0, 255.0));
}

struct ResolvedFilters {
  FilterParams sym_params;
  std::optional<FilterParams> asym_params;
  std::optional<FilterConfig> sym_config;
  std::optional<FilterConfig> asym_config;
  double threshold = kDefaultThreshold;
};

ResolvedFilters resolve(const FilterSource& f) {
  ResolvedFilters r;
  r.sym_params = params_from_list(f.sym, "--sym");
  if (!f.no_asym) {
    r.asym_params = params_from_list(f.asym, "--asym");
  }
  if (!f.tuning.empty()) {
    const TunedPipeline tuned = parse_tuning_report(read_text(f.tuning));
    r.sym_params = tuned.symmetric;
    r.asym_params = f.no_asym ? std::nullopt : tuned.asymmetric;
    r.threshold = tuned.threshold;
  }
  if (!f.sym_config.empty()) {
    r.sym_config = load_config(f.sym_config);
  }
  if (!f.asym_config.empty() && !f.no_asym) {
    r.asym_config = load_config(f.asym_config);
  }
  if (f.threshold) {
    r.threshold = *f.threshold;
  }
  return r;
}

struct SegmentArgs {
  std::string manifest;
  std::string image;
  std::string mask;
  std::string od_mask;
  std::string out_dir = ".";
  FilterSource filters;
  CommonOptions common;
};

int segment_cmd(const SegmentArgs& a, std::ostream& out) {
  const ResolvedFilters f = resolve(a.filters);
  std::vector<ManifestEntry> entries;
  if (!a.manifest.empty()) {
    entries = load_manifest(a.manifest).entries;
  } else if (!a.image.empty()) {
    ManifestEntry e;
    e.image = a.image;
    if (!a.mask.empty()) e.fov_mask = a.mask;
    if (!a.od_mask.empty()) e.od_mask = a.od_mask;
    for (const std::string* p : std::array<const std::string*, 3>{&e.image, &a.mask, &a.od_mask}) {
      if (!p->empty() && !fs::exists(*p)) {
        throw DataError("missing file: " + *p);
      }
    }
    entries.push_back(e);
  } else {
    throw InvalidParameter("segment needs --manifest or --image");
  }

  const FilterConfig sym_cfg = f.sym_config ? *f.sym_config : build_config(f.sym_params, FilterKind::symmetric);
  std::optional<FilterConfig> asym_cfg = f.asym_config;
  if (!asym_cfg && f.asym_params) {
    asym_cfg = build_config(*f.asym_params, FilterKind::asymmetric);
  }
  const OrientationBank sym_bank = make_bank(sym_cfg);
  std::optional<OrientationBank> asym_bank;
  if (asym_cfg) {
    asym_bank = make_bank(*asym_cfg);
  }

  // Load everything first so a bad entry leaves no partial output behind.
  std::vector<Sample> samples;
  for (const ManifestEntry& e : entries) {
    const RgbImage rgb = read_rgb(e.image);
    Sample s;
    s.name = e.stem();
    const Mask fov = e.fov_mask ? read_mask(*e.fov_mask) : Mask::full(rgb.width(), rgb.height());
    if (fov.width() != rgb.width() || fov.height() != rgb.height()) {
      throw DimensionMismatch("FOV mask of " + e.image + " does not match the image size");
    }
    s.mask = fov;
    if (e.od_mask) {
      const Mask odm = read_mask(*e.od_mask);
      if (!odm.same_shape(fov)) {
        throw DimensionMismatch("OD mask of " + e.image + " does not match the image size");
      }
      s.mask = fov.intersect(odm);
    }
    s.image = preprocess(rgb, fov, a.common.preprocess, a.common.threads);
    samples.push_back(std::move(s));
  }

  fs::create_directories(a.out_dir);
  for (const Sample& s : samples) {
    const GrayImage raw =
        combined_response(s.image, sym_bank, asym_bank ? &*asym_bank : nullptr, {true, a.common.threads});
    const GrayImage response = normalized_response(raw, s.mask);
    const GrayImage seg = threshold_response(response, s.mask, f.threshold);
    const fs::path dir(a.out_dir);
    write_scaled((dir / (s.name + "_response.png")).string(), response);
    write_binary((dir / (s.name + "_seg.png")).string(), seg);
    out << s.name << ": " << static_cast<std::size_t>(std::count(seg.pixels().begin(), seg.pixels().end(), 1.0))
        << " vessel pixels\n";
  }
  return kOk;
}

// ----------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string manifest;
  std::string seg_dir;
  std::string output;
  CommonOptions common;
};

struct EvalMasks {
  Mask mask;
  Mask eval;
};

EvalMasks entry_masks(const ManifestEntry& e, int width, int height, OdMode od) {
  EvalMasks m;
  m.mask = e.fov_mask ? read_mask(*e.fov_mask) : Mask::full(width, height);
  if (m.mask.width() != width || m.mask.height() != height) {
    throw DimensionMismatch("FOV mask of " + e.image + " does not match the ground truth size");
  }
  m.eval = m.mask;
  if (e.od_mask) {
    const Mask odm = read_mask(*e.od_mask);
    if (!odm.same_shape(m.mask)) {
      throw DimensionMismatch("OD mask of " + e.image + " does not match the ground truth size");
    }
    m.mask = m.mask.intersect(odm);
    m.eval = od == OdMode::exclude ? m.mask : m.eval;
  }
  return m;
}

int evaluate_cmd(const EvaluateArgs& a, std::ostream& out) {
  const DatasetManifest manifest = load_manifest(a.manifest);
  const OdMode od = parse_od_mode(a.common.od_mode);
  const fs::path dir(a.seg_dir);
  std::vector<std::string> gaps;
  for (const ManifestEntry& e : manifest.entries) {
    const fs::path seg = dir / (e.stem() + "_seg.png");
    if (!fs::exists(seg)) {
      gaps.push_back(seg.string());
    }
  }
  if (!gaps.empty()) {
    std::string msg = "missing segmentations:";
    for (const auto& g : gaps) msg += "\n  " + g;
    throw DataError(msg);
  }

  std::ostringstream csv;
  csv << "image,auc,mcc,accuracy,sensitivity,specificity\n";
  std::vector<std::vector<ConfusionMatrix>> sweeps;
  double sums[5] = {0, 0, 0, 0, 0};
  int counts[5] = {0, 0, 0, 0, 0};
  auto add = [&](int k, double v) {
    if (!std::isnan(v)) {
      sums[k] += v;
      ++counts[k];
    }
  };
  for (const ManifestEntry& e : manifest.entries) {
    const GrayImage gt = read_binary(e.ground_truth);
    const EvalMasks masks = entry_masks(e, gt.width(), gt.height(), od);
    const GrayImage seg = read_binary((dir / (e.stem() + "_seg.png")).string());
    if (!seg.same_shape(gt)) {
      throw DimensionMismatch("segmentation of " + e.stem() + " does not match its ground truth");
    }
    const ConfusionMatrix cm = confusion(seg, gt, masks.eval);
    double area = std::numeric_limits<double>::quiet_NaN();
    const fs::path resp = dir / (e.stem() + "_response.png");
    if (fs::exists(resp)) {
      GrayImage response = read_gray(resp.string());
      for (double& v : response.pixels()) {
        v = std::round(v * 255.0);
      }
      sweeps.push_back(threshold_sweep(response, gt, masks.eval));
      area = auc(roc_from_sweeps(std::span(&sweeps.back(), 1)));
    }
    auto ratio = [](std::uint64_t num, std::uint64_t den) {
      return den ? static_cast<double>(num) / static_cast<double>(den) : std::numeric_limits<double>::quiet_NaN();
    };
    const double m = mcc(cm);
    const double acc = ratio(cm.tp + cm.tn, cm.total());
    const double se = ratio(cm.tp, cm.tp + cm.fn);
    const double sp = ratio(cm.tn, cm.tn + cm.fp);
    add(1, m);
    add(2, acc);
    add(3, se);
    add(4, sp);
    csv << e.stem() << ',' << fixed(area) << ',' << fixed(m) << ',' << fixed(acc) << ',' << fixed(se) << ','
        << fixed(sp) << '\n';
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double mean_auc = sweeps.size() == manifest.entries.size() && !sweeps.empty() ? auc(roc_from_sweeps(sweeps)) : nan;
  std::ostringstream mean;
  mean << "mean," << fixed(mean_auc);
  for (int k = 1; k < 5; ++k) {
    mean << ',' << fixed(counts[k] ? sums[k] / counts[k] : nan);
  }
  csv << mean.str() << '\n';
  const std::string path = a.output.empty() ? (dir / "metrics.csv").string() : a.output;
  write_text(path, csv.str());
  out << "image,auc,mcc,accuracy,sensitivity,specificity\n" << mean.str() << "\n";
  return kOk;
}

// --------------------------------------------------------------------- tune

struct TuneArgs {
  std::string manifest;
  std::string space;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  CommonOptions common;
};

int tune_cmd(const TuneArgs& a, std::ostream& out) {
  const DatasetManifest manifest = load_manifest(a.manifest);
  TuningPlan plan = parse_tuning_plan(read_text(a.space));
  const std::vector<Sample> samples = load_samples(manifest, a.common);
  const auto [train, validation] = split_dataset(std::span<const Sample>(samples), a.seed);

  const TuningResult sym = grid_search(train, plan.symmetric, FilterKind::symmetric, std::nullopt, a.common.threads);
  out << "symmetric: sigma=" << sym.best.sigma << " rho_max=" << sym.best.rho_max << " sigma0=" << sym.best.sigma0
      << " alpha=" << sym.best.alpha << " t=" << sym.best_threshold << " mean MCC=" << fixed(sym.best_mean_mcc, 4)
      << "\n";
  if (plan.asymmetric.sigma.empty()) {
    plan.asymmetric.sigma = asymmetric_sigma_range(sym.best.sigma);
  }
  const TuningResult asym = grid_search(train, plan.asymmetric, FilterKind::asymmetric, sym.best, a.common.threads);
  out << "asymmetric: sigma=" << asym.best.sigma << " rho_max=" << asym.best.rho_max << " sigma0=" << asym.best.sigma0
      << " alpha=" << asym.best.alpha << " t=" << asym.best_threshold << " mean MCC=" << fixed(asym.best_mean_mcc, 4)
      << "\n";

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  write_text(dir / "tuning.json", tuning_report_json(sym, asym));
  save_config((dir / "symmetric.cfg").string(), build_config(sym.best, FilterKind::symmetric));
  save_config((dir / "asymmetric.cfg").string(), build_config(asym.best, FilterKind::asymmetric));
  std::ostringstream roc_csv;
  write_roc_csv(roc_csv, asym.roc);
  write_text(dir / "roc.csv", roc_csv.str());
  write_text(dir / "roc.svg", roc_svg(asym.roc, asym.best_threshold));
  std::ostringstream split;
  split << "set,image\n";
  for (const Sample& s : train) split << "train," << s.name << "\n";
  for (const Sample& s : validation) split << "validation," << s.name << "\n";
  write_text(dir / "split.csv", split.str());
  out << "training AUC " << fixed(auc(asym.roc), 4) << "\n";
  return kOk;
}

// -------------------------------------------------------------- sensitivity

struct SensitivityArgs {
  std::string manifest;
  std::string param;
  std::vector<double> offsets{-0.5, -0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::string output = "sensitivity.csv";
  FilterSource filters;
  CommonOptions common;
};

int sensitivity_cmd(const SensitivityArgs& a, std::ostream& out) {
  const ResolvedFilters f = resolve(a.filters);
  const DatasetManifest manifest = load_manifest(a.manifest);
  const std::vector<Sample> samples = load_samples(manifest, a.common);
  const SensitivityParam param = parse_sensitivity_param(a.param);
  const int threshold = static_cast<int>(std::lround(f.threshold));
  const auto rows = sensitivity_experiment(samples, f.sym_params, f.asym_params, threshold, a.offsets, param,
                                           a.common.threads);
  std::ostringstream csv;
  csv << "offset,value,status,t,df,significant\n";
  for (const SensitivityRow& r : rows) {
    csv << fixed(r.offset, 2) << ',' << fixed(r.value, 6) << ',';
    switch (r.status) {
    case SensitivityRow::Status::skipped:
      csv << "skipped,,,\n";
      break;
    case SensitivityRow::Status::invalid:
      csv << "invalid,,,\n";
      break;
    case SensitivityRow::Status::ok:
      csv << "ok," << (std::isinf(r.test.t) ? (r.test.t > 0 ? "inf" : "-inf") : fixed(r.test.t, 4)) << ','
          << r.test.df << ',' << (r.test.significant ? 1 : 0) << '\n';
      break;
    }
  }
  write_text(a.output, csv.str());
  out << csv.str();
  return kOk;
}

// ---------------------------------------------------------------------- roc

struct RocArgs {
  std::string manifest;
  std::string response_dir;
  std::string out_dir = ".";
  int mark = -1;
  CommonOptions common;
};

int roc_cmd(const RocArgs& a, std::ostream& out) {
  const DatasetManifest manifest = load_manifest(a.manifest);
  const OdMode od = parse_od_mode(a.common.od_mode);
  std::vector<std::vector<ConfusionMatrix>> sweeps;
  std::vector<std::string> gaps;
  for (const ManifestEntry& e : manifest.entries) {
    const fs::path resp = fs::path(a.response_dir) / (e.stem() + "_response.png");
    if (!fs::exists(resp)) {
      gaps.push_back(resp.string());
    }
  }
  if (!gaps.empty()) {
    std::string msg = "missing responses:";
    for (const auto& g : gaps) msg += "\n  " + g;
    throw DataError(msg);
  }
  for (const ManifestEntry& e : manifest.entries) {
    const GrayImage gt = read_binary(e.ground_truth);
    const EvalMasks masks = entry_masks(e, gt.width(), gt.height(), od);
    GrayImage response = read_gray((fs::path(a.response_dir) / (e.stem() + "_response.png")).string());
    if (!response.same_shape(gt)) {
      throw DimensionMismatch("response of " + e.stem() + " does not match its ground truth");
    }
    for (double& v : response.pixels()) {
      v = std::round(v * 255.0);
    }
    sweeps.push_back(threshold_sweep(response, gt, masks.eval));
  }
  const RocCurve curve = roc_from_sweeps(sweeps);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  std::ostringstream csv;
  write_roc_csv(csv, curve);
  write_text(dir / "roc.csv", csv.str());
  write_text(dir / "roc.svg", roc_svg(curve, a.mark));
  out << "AUC " << fixed(auc(curve), 4) << "\n";
  return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trainable bar-selective filters for segmenting elongated structures"};
  app.require_subcommand(1);

  ConfigureArgs configure_args;
  auto* configure_cmd = app.add_subcommand("configure", "Configure a filter from a prototype pattern");
  auto* proto_opt = configure_cmd->add_option("--prototype", configure_args.prototype, "Prototype image");
  configure_cmd->add_option("--synthetic", configure_args.synthetic, "Built-in vertical bar prototype")
      ->check(CLI::IsMember({"full-bar", "half-bar"}))
      ->excludes(proto_opt);
  configure_cmd->add_option("--size", configure_args.size, "Synthetic prototype size")->check(CLI::Range(9, 4096));
  configure_cmd->add_option("--bar-width", configure_args.bar_width, "Synthetic bar width")->check(CLI::PositiveNumber);
  configure_cmd->add_option("--center", configure_args.center, "Center x,y")->delimiter(',')->expected(2);
  configure_cmd->add_option("--radii", configure_args.radii, "Circle radii, must include 0")->delimiter(',');
  configure_cmd->add_option("--sigma", configure_args.sigma, "DoG sigma")->check(CLI::PositiveNumber);
  configure_cmd->add_option("--peak-fraction", configure_args.peak_fraction, "Relative peak level")
      ->check(CLI::Range(1e-6, 0.999999));
  configure_cmd->add_option("--sigma0", configure_args.sigma0, "Base blur sigma")->check(CLI::PositiveNumber);
  configure_cmd->add_option("--alpha", configure_args.alpha, "Blur growth rate")->check(CLI::NonNegativeNumber);
  configure_cmd->add_option("-o,--output", configure_args.output, "Filter config file")->required();

  SegmentArgs segment_args;
  auto* segment_sub = app.add_subcommand("segment", "Filter and threshold images");
  auto* seg_manifest = segment_sub->add_option("--manifest", segment_args.manifest, "Dataset manifest (JSON)");
  segment_sub->add_option("--image", segment_args.image, "Single input image")->excludes(seg_manifest);
  segment_sub->add_option("--mask", segment_args.mask, "FOV mask for --image");
  segment_sub->add_option("--od-mask", segment_args.od_mask, "Optic-disc mask for --image");
  segment_sub->add_option("--out", segment_args.out_dir, "Output directory");
  add_filter_source(segment_sub, segment_args.filters, true);
  add_common(segment_sub, segment_args.common);

  EvaluateArgs evaluate_args;
  auto* evaluate_sub = app.add_subcommand("evaluate", "Score segmentations against ground truth");
  evaluate_sub->add_option("--manifest", evaluate_args.manifest, "Dataset manifest (JSON)")->required();
  evaluate_sub->add_option("--seg-dir", evaluate_args.seg_dir, "Directory with <stem>_seg.png files")->required();
  evaluate_sub->add_option("-o,--output", evaluate_args.output, "Metrics CSV (default <seg-dir>/metrics.csv)");
  add_common(evaluate_sub, evaluate_args.common);

  TuneArgs tune_args;
  auto* tune_sub = app.add_subcommand("tune", "Grid-search filter parameters on a training split");
  tune_sub->add_option("--manifest", tune_args.manifest, "Dataset manifest (JSON)")->required();
  tune_sub->add_option("--space", tune_args.space, "Search space (JSON)")->required();
  tune_sub->add_option("--seed", tune_args.seed, "Split seed");
  tune_sub->add_option("--out", tune_args.out_dir, "Output directory");
  add_common(tune_sub, tune_args.common);

  SensitivityArgs sens_args;
  auto* sens_sub = app.add_subcommand("sensitivity", "Paired t-tests of perturbed symmetric parameters");
  sens_sub->add_option("--manifest", sens_args.manifest, "Dataset manifest (JSON)")->required();
  sens_sub->add_option("--param", sens_args.param, "Parameter to perturb")
      ->required()
      ->check(CLI::IsMember({"sigma0", "sigma", "alpha"}));
  sens_sub->add_option("--offsets", sens_args.offsets, "Offsets from the optimum")->delimiter(',');
  sens_sub->add_option("-o,--output", sens_args.output, "Output CSV");
  add_filter_source(sens_sub, sens_args.filters, false);
  add_common(sens_sub, sens_args.common);

  RocArgs roc_args;
  auto* roc_sub = app.add_subcommand("roc", "ROC curve of saved responses");
  roc_sub->add_option("--manifest", roc_args.manifest, "Dataset manifest (JSON)")->required();
  roc_sub->add_option("--response-dir", roc_args.response_dir, "Directory with <stem>_response.png")->required();
  roc_sub->add_option("--out", roc_args.out_dir, "Output directory");
  roc_sub->add_option("--mark", roc_args.mark, "Threshold to mark on the plot")->check(CLI::Range(0, 255));
  add_common(roc_sub, roc_args.common);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*configure_cmd) {
      if (configure_args.prototype.empty() && configure_args.synthetic.empty()) {
        err << "configure needs --prototype or --synthetic\n";
        return kUsage;
      }
      return configure(configure_args, out);
    }
    if (*segment_sub) {
      if (segment_args.manifest.empty() && segment_args.image.empty()) {
        err << "segment needs --manifest or --image\n";
        return kUsage;
      }
      return segment_cmd(segment_args, out);
    }
    if (*evaluate_sub) return evaluate_cmd(evaluate_args, out);
    if (*tune_sub) return tune_cmd(tune_args, out);
    if (*sens_sub) return sensitivity_cmd(sens_args, out);
    if (*roc_sub) return roc_cmd(roc_args, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

} // namespace bcosfire::cli
