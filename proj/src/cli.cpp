// Copyright 2026 The obbkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "obbkit/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "obbkit/dotaio.hpp"
#include "obbkit/error.hpp"
#include "obbkit/evalkit.hpp"
#include "obbkit/fitkit.hpp"
#include "obbkit/geom.hpp"
#include "obbkit/piou.hpp"
#include "obbkit/polyclip.hpp"

namespace obbkit::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

std::vector<double> parse_numbers(const std::string& text, std::size_t count, const std::string& flag,
                                  const std::string& shape) {
  std::vector<double> values;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    const std::string tok = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    double v = 0.0;
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (tok.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
      throw UsageError(fmt::format("{}: expected {}, got '{}'", flag, shape, text));
    }
    values.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (values.size() != count) throw UsageError(fmt::format("{}: expected {}, got '{}'", flag, shape, text));
  return values;
}

// "x,y,w,h,theta_deg", canonicalized.
Obb parse_box(const std::string& text, const std::string& flag) {
  const std::vector<double> v = parse_numbers(text, 5, flag, "x,y,w,h,theta_deg");
  try {
    return canonicalize(v[0], v[1], v[2], v[3], deg_to_rad(v[4]));
  } catch (const InvalidBoxError& e) {
    throw UsageError(fmt::format("{}: {}", flag, e.what()));
  }
}

Obb parse_raw_box(const std::string& text, const std::string& flag) {
  const std::vector<double> v = parse_numbers(text, 5, flag, "x,y,w,h,theta_deg");
  const Obb raw{v[0], v[1], v[2], v[3], deg_to_rad(v[4])};
  try {
    canonicalize(raw);
  } catch (const InvalidBoxError& e) {
    throw UsageError(fmt::format("{}: {}", flag, e.what()));
  }
  return raw;
}

std::string format_box(const Obb& b) {
  return fmt::format("{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}", b.x, b.y, b.w, b.h, rad_to_deg(b.theta));
}

// Writes to `path`, or to `out` when path is empty.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw std::runtime_error(fmt::format("cannot write {}", path));
}

struct PiouFlags {
  double k = 10.0;
  int resolution = 1;
  double margin = 2.0;

  void add_to(CLI::App* app) {
    app->add_option("--k", k, "Kernel steepness")->capture_default_str();
    app->add_option("--resolution", resolution, "PIoU samples per pixel per axis")->capture_default_str();
    app->add_option("--margin", margin, "PIoU lattice margin (px)")->capture_default_str();
  }

  PiouConfig config() const {
    PiouConfig cfg;
    cfg.k = k;
    cfg.resolution = resolution;
    cfg.margin = margin;
    cfg.validate();
    return cfg;
  }
};

void run_iou(const std::vector<std::string>& boxes, const PiouFlags& pf, std::ostream& out) {
  if (boxes.size() != 2) throw UsageError("--box: expected exactly two boxes");
  const Obb a = parse_box(boxes[0], "--box");
  const Obb b = parse_box(boxes[1], "--box");
  const PiouConfig cfg = pf.config();
  out << fmt::format("exact {:.4f}\n", iou_exact(a, b));
  out << fmt::format("piou {:.4f}\n", piou(a, b, cfg));
  out << fmt::format("piou_loss {:.4f}\n", piou_loss(a, b, cfg));
}

ClassMap class_universe(const std::string& classes_file, const std::vector<AnnotationFile>& gts,
                        const fs::path& det_dir) {
  if (!classes_file.empty()) return ClassMap::parse(read_text_file(classes_file));
  std::set<std::string> names;
  for (const AnnotationFile& f : gts) {
    for (const Annotation& a : f.objects) names.insert(a.class_name);
  }
  if (!det_dir.empty()) {
    for (std::string& n : detection_class_names(det_dir)) names.insert(std::move(n));
  }
  return ClassMap(std::vector<std::string>(names.begin(), names.end()));
}

void run_eval(const std::string& gt_dir, const std::string& det_dir, double iou_thr, const std::string& classes_file,
              std::ostream& out) {
  if (!fs::is_directory(gt_dir)) throw UsageError(fmt::format("--gt: not a directory: {}", gt_dir));
  if (!fs::is_directory(det_dir)) throw UsageError(fmt::format("--det: not a directory: {}", det_dir));
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(gt_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<AnnotationFile> annotations;
  for (const fs::path& p : files) {
    try {
      annotations.push_back(parse_annotations(read_text_file(p), p.stem().string()));
    } catch (const ParseError& e) {
      throw ParseError(e.line(), fmt::format("{}: {}", p.string(), e.detail()));
    }
  }
  const ClassMap classes = class_universe(classes_file, annotations, det_dir);
  if (classes.size() == 0) throw UsageError("--gt: no classes found");

  std::vector<GroundTruth> gts;
  for (const AnnotationFile& f : annotations) {
    std::vector<GroundTruth> part = to_ground_truth(f, classes);
    gts.insert(gts.end(), part.begin(), part.end());
  }
  const std::vector<Detection> dets = parse_detections(det_dir, classes);
  const EvalReport report = evaluate(dets, gts, iou_thr, classes.size());

  out << fmt::format("{:<24} {:>6} {:>6} {:>6} {:>8}\n", "class", "npos", "tp", "fp", "AP");
  for (const ClassResult& cr : report.classes) {
    if (cr.npos == 0) continue;
    out << fmt::format("{:<24} {:>6} {:>6} {:>6} {:>8.4f}\n", classes.name(cr.class_id), cr.npos, cr.tp, cr.fp,
                       cr.ap);
  }
  out << fmt::format("mAP: {:.4f}\n", report.map);
}

void run_nms(const std::string& in, double tau, const std::string& out_path, std::ostream& out) {
  const std::vector<Detection> dets = parse_detection_lines(read_text_file(in), 0);
  std::string text;
  for (const Detection& d : batched_rotated_nms(dets, tau)) text += format_detection_line(d) + '\n';
  emit(out_path, text, out);
}

void run_fit(const std::string& loss, const std::string& gt, const std::vector<std::string>& alt_gts,
             const std::string& init, FitConfig cfg, double jitter_angle_deg, const PiouFlags& pf,
             const std::string& out_path, std::ostream& out) {
  if (loss == "piou") {
    cfg.loss = FitLoss::kPiou;
  } else if (loss == "smoothl1" || loss == "smooth_l1") {
    cfg.loss = FitLoss::kSmoothL1;
  } else {
    throw UsageError(fmt::format("--loss: expected piou or smoothl1, got '{}'", loss));
  }
  cfg.piou = pf.config();
  cfg.jitter_angle = deg_to_rad(jitter_angle_deg);
  std::vector<Obb> encodings{parse_raw_box(gt, "--gt")};
  for (const std::string& s : alt_gts) encodings.push_back(parse_raw_box(s, "--alt-gt"));
  const FitTrace trace = fit(encodings, parse_raw_box(init, "--init"), cfg);

  std::string csv = "step,x,y,w,h,theta_deg,loss,iou\n";
  for (const FitStep& s : trace.steps) {
    csv += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.9f},{:.9f}\n", s.step, s.box.x, s.box.y, s.box.w,
                       s.box.h, rad_to_deg(s.box.theta), s.loss, s.iou);
  }
  emit(out_path, csv, out);
  if (!out_path.empty()) {
    out << fmt::format("converged {}\nsteps {}\nfinal_box {}\nfinal_iou {:.6f}\nangle_error_deg {:.6f}\n",
                       trace.converged ? "yes" : "no", trace.steps.size(), format_box(trace.steps.back().box),
                       trace.final_iou, rad_to_deg(trace.angle_error));
    if (trace.saturated) out << "warning: initial box barely overlaps the target; PIoU gradient is saturated\n";
    if (trace.stalled) out << "warning: line search found no descent step\n";
  }
}

void run_sweep(const std::string& gt, double from, double to, double step, double beta, const PiouFlags& pf,
               const std::string& out_path, std::ostream& out) {
  if (!(step > 0.0)) throw UsageError("--step: must be positive");
  if (!(to >= from)) throw UsageError("--to: must not be below --from");
  const Obb g = parse_box(gt, "--gt");
  std::vector<double> degrees, radians;
  const auto n = static_cast<std::int64_t>(std::floor((to - from) / step + 1e-9));
  for (std::int64_t i = 0; i <= n; ++i) {
    const double deg = from + static_cast<double>(i) * step;
    degrees.push_back(deg);
    radians.push_back(deg_to_rad(deg));
  }
  const std::vector<SweepRow> rows = boundary_sweep(g, radians, pf.config(), beta);
  std::string csv = "angle_deg,piou_loss,smooth_l1\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv += fmt::format("{:.6f},{:.9f},{:.9f}\n", degrees[i], rows[i].piou_loss, rows[i].smooth_l1);
  }
  emit(out_path, csv, out);
}

std::string patch_id(const std::string& image, const TileWindow& w) {
  return fmt::format("{}__{}__{}", image, w.x0, w.y0);
}

void run_tile(std::int64_t width, std::int64_t height, std::int64_t patch, std::int64_t stride,
              const std::string& image, std::ostream& out) {
  for (const TileWindow& w : tile_windows(width, height, patch, stride)) {
    out << fmt::format("{} {} {} {} {} {}\n", patch_id(image, w), image, w.x0, w.y0, w.width, w.height);
  }
}

struct WindowRecord {
  std::string image;
  std::size_t index;
};

void run_merge(const std::string& windows_file, const std::string& det_dir, double tau,
               const std::string& classes_file, const std::string& out_dir, std::ostream& out) {
  std::vector<TileWindow> windows;
  std::map<std::string, WindowRecord> by_patch;
  std::istringstream lines(read_text_file(windows_file));
  std::string line;
  for (std::size_t line_no = 1; std::getline(lines, line); ++line_no) {
    std::istringstream ls(line);
    std::string pid, image;
    TileWindow w;
    if (!(ls >> pid)) continue;
    if (!(ls >> image >> w.x0 >> w.y0 >> w.width >> w.height)) {
      throw ParseError(line_no, "expected 'patch_id image_id x0 y0 width height'");
    }
    if (!by_patch.emplace(pid, WindowRecord{image, windows.size()}).second) {
      throw ParseError(line_no, fmt::format("duplicate patch id '{}'", pid));
    }
    windows.push_back(w);
  }

  const ClassMap classes = classes_file.empty() ? ClassMap(detection_class_names(det_dir))
                                                : ClassMap::parse(read_text_file(classes_file));
  std::map<std::string, PatchDetections> grouped;
  for (Detection d : parse_detections(det_dir, classes)) {
    const auto it = by_patch.find(d.image_id);
    if (it == by_patch.end()) throw UsageError(fmt::format("--dets: patch id '{}' not in --windows", d.image_id));
    PatchDetections& p = grouped[d.image_id];
    p.window = it->second.index;
    d.image_id = it->second.image;
    p.detections.push_back(std::move(d));
  }
  std::vector<PatchDetections> patches;
  for (auto& [pid, p] : grouped) patches.push_back(std::move(p));
  const std::vector<Detection> merged = merge_patch_detections(patches, windows, tau);

  if (!out_dir.empty()) {
    write_detections(out_dir, merged, classes);
    out << fmt::format("merged {} detections into {}\n", merged.size(), out_dir);
    return;
  }
  for (int c = 0; c < classes.size(); ++c) {
    for (const Detection& d : merged) {
      if (d.class_id == c) out << classes.name(c) << ' ' << format_detection_line(d) << '\n';
    }
  }
}

void run_acm(const std::string& box, const std::string& loc, double stride, std::ostream& out) {
  const Obb b = parse_box(box, "--box");
  const std::vector<double> l = parse_numbers(loc, 2, "--loc", "X,Y");
  if (!(stride > 0.0)) throw UsageError("--stride: must be positive");
  const AcmPointSet set = acm_points(b, {l[0], l[1]}, stride);
  out << "slot gx gy px py ox oy\n";
  for (int i = 0; i < 9; ++i) {
    const Point g = acm_grid_cell(i);
    out << fmt::format("{} {} {} {:.6f} {:.6f} {:.6f} {:.6f}\n", i, static_cast<int>(g.x), static_cast<int>(g.y),
                       set.points[i].x, set.points[i].y, set.offsets[i].x, set.offsets[i].y);
  }
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Oriented bounding box toolkit: exact/pixel IoU, evaluation, tiling, regression experiments",
               "obbkit"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  PiouFlags pf;
  PiouFlags fit_pf{.resolution = 2};

  std::vector<std::string> iou_boxes;
  CLI::App* iou = app.add_subcommand("iou", "Exact IoU and PIoU of two boxes");
  iou->add_option("--box", iou_boxes, "Box x,y,w,h,theta_deg (give twice)")->required()->expected(1)->take_all();
  pf.add_to(iou);

  std::string gt_dir, det_dir, classes_file;
  double iou_thr = 0.5;
  CLI::App* eval = app.add_subcommand("eval", "VOC2007 11-point AP over DOTA-format files");
  eval->add_option("--gt", gt_dir, "Directory of DOTA annotation .txt files")->required();
  eval->add_option("--det", det_dir, "Directory of Task1_{class}.txt files")->required();
  eval->add_option("--iou-thr", iou_thr, "Matching IoU threshold")->capture_default_str();
  eval->add_option("--classes", classes_file, "Class map file, one name per line");

  std::string nms_in, nms_out;
  double nms_tau = 0.1;
  CLI::App* nms = app.add_subcommand("nms", "Rotated NMS over one Task1 detection file");
  nms->add_option("--in", nms_in, "Task1 detection file")->required();
  nms->add_option("--tau", nms_tau, "IoU suppression threshold")->capture_default_str();
  nms->add_option("--out", nms_out, "Output file (default stdout)");

  std::string fit_loss = "piou", fit_gt, fit_init, fit_out;
  std::vector<std::string> fit_alt;
  FitConfig fit_cfg;
  double jitter_angle_deg = 0.0;
  CLI::App* fitc = app.add_subcommand("fit", "Gradient-descent box regression, trace as CSV");
  fitc->add_option("--loss", fit_loss, "piou or smoothl1")->capture_default_str();
  fitc->add_option("--gt", fit_gt, "Target box x,y,w,h,theta_deg")->required();
  fitc->add_option("--alt-gt", fit_alt, "Alternate target encodings cycled per step");
  fitc->add_option("--init", fit_init, "Initial box x,y,w,h,theta_deg")->required();
  fitc->add_option("--steps", fit_cfg.max_steps, "Maximum steps")->capture_default_str();
  fitc->add_option("--seed", fit_cfg.seed, "Seed for the MT19937-64 init jitter")->capture_default_str();
  fitc->add_option("--jitter-translation", fit_cfg.jitter_translation, "Init jitter (px)")->capture_default_str();
  fitc->add_option("--jitter-angle", jitter_angle_deg, "Init jitter (deg)")->capture_default_str();
  fitc->add_option("--lr-translation", fit_cfg.steps.translation)->capture_default_str();
  fitc->add_option("--lr-extent", fit_cfg.steps.extent)->capture_default_str();
  fitc->add_option("--lr-angle", fit_cfg.steps.angle)->capture_default_str();
  fitc->add_option("--beta", fit_cfg.beta, "Smooth-L1 beta")->capture_default_str();
  fitc->add_option("--iou-target", fit_cfg.iou_target)->capture_default_str();
  fitc->add_option("--out", fit_out, "CSV path (default stdout)");
  fit_pf.add_to(fitc);

  std::string sweep_gt, sweep_out;
  double sweep_from = -90.0, sweep_to = 270.0, sweep_step = 1.0, sweep_beta = 1.0;
  CLI::App* sweep = app.add_subcommand("sweep", "PIoU and smooth-L1 loss over a range of predicted angles");
  sweep->add_option("--gt", sweep_gt, "Target box x,y,w,h,theta_deg")->required();
  sweep->add_option("--from", sweep_from, "First angle (deg)")->capture_default_str();
  sweep->add_option("--to", sweep_to, "Last angle (deg)")->capture_default_str();
  sweep->add_option("--step", sweep_step, "Angle step (deg)")->capture_default_str();
  sweep->add_option("--beta", sweep_beta, "Smooth-L1 beta")->capture_default_str();
  sweep->add_option("--out", sweep_out, "CSV path (default stdout)");
  pf.add_to(sweep);

  std::int64_t tile_w = 0, tile_h = 0, tile_patch = 1024, tile_stride = 824;
  std::string tile_image = "image";
  CLI::App* tile = app.add_subcommand("tile", "Patch windows for an image");
  tile->add_option("--width", tile_w)->required();
  tile->add_option("--height", tile_h)->required();
  tile->add_option("--patch", tile_patch)->capture_default_str();
  tile->add_option("--stride", tile_stride)->capture_default_str();
  tile->add_option("--image", tile_image, "Image id used in patch ids")->capture_default_str();

  std::string merge_windows, merge_dets, merge_classes, merge_out;
  double merge_tau = 0.1;
  CLI::App* merge = app.add_subcommand("merge", "Merge per-patch detections into image coordinates");
  merge->add_option("--windows", merge_windows, "Window list as printed by `tile`")->required();
  merge->add_option("--dets", merge_dets, "Directory of Task1 files keyed by patch id")->required();
  merge->add_option("--tau", merge_tau, "NMS threshold")->capture_default_str();
  merge->add_option("--classes", merge_classes, "Class map file");
  merge->add_option("--out", merge_out, "Output directory for Task1 files (default stdout)");

  std::string acm_box, acm_loc;
  double acm_stride = 1.0;
  CLI::App* acm = app.add_subcommand("acm", "Nine alignment sampling points and kernel offsets");
  acm->add_option("--box", acm_box, "Box x,y,w,h,theta_deg")->required();
  acm->add_option("--loc", acm_loc, "Sampling location X,Y (image px)")->required();
  acm->add_option("--stride", acm_stride, "Feature stride (px)")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (iou->parsed()) run_iou(iou_boxes, pf, out);
    if (eval->parsed()) run_eval(gt_dir, det_dir, iou_thr, classes_file, out);
    if (nms->parsed()) run_nms(nms_in, nms_tau, nms_out, out);
    if (fitc->parsed()) run_fit(fit_loss, fit_gt, fit_alt, fit_init, fit_cfg, jitter_angle_deg, fit_pf, fit_out, out);
    if (sweep->parsed()) run_sweep(sweep_gt, sweep_from, sweep_to, sweep_step, sweep_beta, pf, sweep_out, out);
    if (tile->parsed()) run_tile(tile_w, tile_h, tile_patch, tile_stride, tile_image, out);
    if (merge->parsed()) run_merge(merge_windows, merge_dets, merge_tau, merge_classes, merge_out, out);
    if (acm->parsed()) run_acm(acm_box, acm_loc, acm_stride, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace obbkit::cli
