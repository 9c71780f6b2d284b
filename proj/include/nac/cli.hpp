// Copyright 2026 The nac Authors. All Rights Reserved.
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

#pragma once

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nac/core.hpp"
#include "nac/estimation.hpp"
#include "nac/inference.hpp"
#include "nac/io.hpp"
#include "nac/selection.hpp"
#include "nac/synth.hpp"

namespace nac::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kConfig = 2, kResource = 3 };

inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct FitArgs {
  std::string keypoints, out, report;
  std::size_t views = 5, parts_per_view = 10, restarts = 5, max_iters = 100;
  std::uint64_t seed = 0;
};

struct InferArgs {
  std::string keypoints, model, out;
  std::size_t max_iters = kDefaultInferIters;
};

struct SelectArgs {
  std::string keypoints, model, report, out;
  std::size_t k = 10;
  std::optional<double> lambda;
};

struct FilterArgs {
  std::string boxes, keypoints, model, report, out;
  std::size_t min_inside = 3, best_parts = 5;
};

struct SynthArgs {
  SynthSpec spec;
  std::string out, truth, truth_report;
};

struct OracleArgs {
  std::string keypoints;
  std::size_t views = 5, parts_per_view = 10;
  double limit = 1e6;
};

namespace detail {

inline void check_report_matches(const io::KeypointFile& kp, const ConstellationModel& model,
                                 const io::ReportFile& report) {
  if (kp.num_proposals != model.num_parts) {
    throw StructuralError("keypoints have " + std::to_string(kp.num_proposals) +
                          " proposals, model has " + std::to_string(model.num_parts));
  }
  if (report.views != model.num_views || report.parts_per_view != model.parts_per_view) {
    throw StructuralError("report was produced for a different model (V/M mismatch)");
  }
  if (report.image_ids.size() != kp.images.size()) {
    throw StructuralError("report covers " + std::to_string(report.image_ids.size()) +
                          " images, keypoints have " + std::to_string(kp.images.size()));
  }
  for (std::size_t i = 0; i < kp.images.size(); ++i) {
    if (report.image_ids[i] != kp.images[i].meta.image_id) {
      throw StructuralError("report image " + std::to_string(i) + " is '" + report.image_ids[i] +
                            "', keypoints have '" + kp.images[i].meta.image_id + "'");
    }
  }
}

}  // namespace detail

inline int run_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
  const auto kp = io::load(args.keypoints, io::parse_keypoints);
  FitConfig cfg{args.views, args.parts_per_view, args.restarts, args.max_iters, args.seed};
  if (cfg.parts_per_view > kp.num_proposals) {
    throw ConfigError("parts per view " + std::to_string(cfg.parts_per_view) + " exceeds the " +
                      std::to_string(kp.num_proposals) + " proposals");
  }
  const FitReport report = fit(kp.images, cfg);
  io::write_text(args.out, io::serialize(report.model));
  io::write_text(args.report, io::serialize(io::make_report(report, kp.images)));
  for (const auto& v : report.descent_violations) {
    err << "warning: objective rose in restart " << v.restart << " iteration " << v.iteration
        << " (" << to_string(v.step) << "): " << format_real(v.before) << " -> "
        << format_real(v.after) << "\n";
  }
  out << "objective " << format_real(report.objective) << " best_restart " << report.best_restart
      << "\n";
  return kOk;
}

inline int run_infer(const InferArgs& args, std::ostream& out, std::ostream&) {
  const auto kp = io::load(args.keypoints, io::parse_keypoints);
  const auto model = io::load(args.model, io::parse_model);
  if (kp.num_proposals != model.num_parts) {
    throw StructuralError("keypoints have " + std::to_string(kp.num_proposals) +
                          " proposals, model has " + std::to_string(model.num_parts));
  }
  io::OrderedJson doc;
  doc["format"] = io::kInferenceFormat;
  io::OrderedJson images = io::OrderedJson::array();
  for (const auto& image : kp.images) {
    const InferenceResult r = infer(image, model, args.max_iters);
    io::OrderedJson rec;
    rec["id"] = image.meta.image_id;
    rec["view"] = r.view;
    rec["root"] = io::OrderedJson::array({r.root.x, r.root.y});
    io::OrderedJson residuals = io::OrderedJson::array();
    for (const auto& pr : r.residuals) residuals.push_back(io::OrderedJson::array({pr.part, pr.value}));
    rec["residuals"] = std::move(residuals);
    images.push_back(std::move(rec));
  }
  doc["images"] = std::move(images);
  io::write_text(args.out, io::to_text(doc));
  out << "inferred " << kp.images.size() << " images\n";
  return kOk;
}

inline int run_select(const SelectArgs& args, std::ostream& out, std::ostream&) {
  const auto kp = io::load(args.keypoints, io::parse_keypoints);
  const auto model = io::load(args.model, io::parse_model);
  const auto report = io::load(args.report, io::parse_report);
  detail::check_report_matches(kp, model, report);
  if (args.lambda && !(*args.lambda > 0.0)) throw ConfigError("--lambda must be positive");

  const auto counts = count_part_usage(kp.images, model, report.latent);
  const auto top = top_k_parts(counts, args.k);
  io::OrderedJson doc;
  doc["format"] = io::kPartsFormat;
  doc["k"] = args.k;
  doc["counts"] = counts;
  doc["top_k"] = top;
  if (args.lambda) {
    doc["lambda"] = *args.lambda;
    io::OrderedJson patches = io::OrderedJson::array();
    for (const auto& image : kp.images) {
      io::OrderedJson rec;
      rec["id"] = image.meta.image_id;
      io::OrderedJson boxes = io::OrderedJson::array();
      for (std::size_t p : top) {
        if (!image.is_visible(p)) {
          boxes.push_back(nullptr);
          continue;
        }
        const Box b = patch_box(image.locations[p], image.meta, *args.lambda);
        boxes.push_back(io::OrderedJson::array({b.x0, b.y0, b.x1, b.y1}));
      }
      rec["boxes"] = std::move(boxes);
      patches.push_back(std::move(rec));
    }
    doc["patches"] = std::move(patches);
  }
  io::write_text(args.out, io::to_text(doc));
  out << "top_k";
  for (std::size_t p : top) out << " " << p;
  out << "\n";
  return kOk;
}

inline int run_filter(const FilterArgs& args, std::ostream& out, std::ostream& err) {
  const auto boxes = io::load(args.boxes, io::parse_boxes);
  const auto kp = io::load(args.keypoints, io::parse_keypoints);
  const auto model = io::load(args.model, io::parse_model);
  const auto report = io::load(args.report, io::parse_report);
  detail::check_report_matches(kp, model, report);

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < kp.images.size(); ++i) index[kp.images[i].meta.image_id] = i;
  std::vector<std::string> unknown;
  for (const auto& set : boxes.images) {
    if (!index.contains(set.image_id)) unknown.push_back(set.image_id);
  }
  if (!unknown.empty()) {
    err << "unknown image ids:";
    for (const auto& id : unknown) err << " " << id;
    err << "\n";
    return kValidation;
  }

  io::BoxFile kept;
  for (const auto& set : boxes.images) {
    const std::size_t i = index.at(set.image_id);
    const auto parts = best_fitting_parts(kp.images, i, model, report.latent, args.best_parts);
    kept.images.push_back(filter_boxes(set, part_pixels(kp.images[i], parts), args.min_inside));
    out << set.image_id << " " << kept.images.back().boxes.size() << "/" << set.boxes.size()
        << "\n";
  }
  io::write_text(args.out, io::serialize(kept));
  return kOk;
}

inline int run_synth(const SynthArgs& args, std::ostream& out, std::ostream&) {
  const SynthResult s = generate(args.spec);
  io::write_text(args.out, io::serialize(io::make_keypoint_file(s.data)));
  io::write_text(args.truth, io::serialize(s.truth));
  if (!args.truth_report.empty()) {
    FitReport truth;
    truth.model = s.truth;
    truth.latent = s.truth_latent;
    truth.objective = objective(s.data, s.truth, s.truth_latent);
    truth.iterations_per_restart = {0};
    truth.restart_objectives = {truth.objective};
    io::write_text(args.truth_report, io::serialize(io::make_report(truth, s.data)));
  }
  out << "generated " << s.data.size() << " images, " << s.clipped_coordinates
      << " clipped coordinates\n";
  return kOk;
}

inline int run_oracle(const OracleArgs& args, std::ostream& out, std::ostream&) {
  const auto kp = io::load(args.keypoints, io::parse_keypoints);
  OracleOptions options;
  options.max_enumeration = args.limit;
  const OracleResult r = oracle_fit(kp.images, args.views, args.parts_per_view, options);
  out << "best_objective " << format_real(r.best_objective) << "\n"
      << "argmin_count " << r.argmin_count << "\n"
      << "enumerated " << r.enumerated << "\n";
  return kOk;
}

/// Parses the command line and dispatches to a subcommand; returns the
/// process exit code.
inline int run(std::vector<std::string> argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Part constellation discovery over keypoint proposals", "nac"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a multi-view constellation model");
  fit_cmd->add_option("--keypoints", fit_args.keypoints, "nac-keypoints/1 input")->required();
  fit_cmd->add_option("--views", fit_args.views, "Number of views")->capture_default_str();
  fit_cmd->add_option("--parts-per-view", fit_args.parts_per_view, "Parts selected per view")
      ->capture_default_str();
  fit_cmd->add_option("--restarts", fit_args.restarts, "Random restarts")->capture_default_str();
  fit_cmd->add_option("--max-iters", fit_args.max_iters, "Iteration cap per restart")
      ->capture_default_str();
  fit_cmd->add_option("--seed", fit_args.seed, "RNG seed")->capture_default_str();
  fit_cmd->add_option("--out", fit_args.out, "nac-model/1 output")->required();
  fit_cmd->add_option("--report", fit_args.report, "nac-report/1 output")->required();

  InferArgs infer_args;
  auto* infer_cmd = app.add_subcommand("infer", "Infer root and view of each image");
  infer_cmd->add_option("--keypoints", infer_args.keypoints)->required();
  infer_cmd->add_option("--model", infer_args.model)->required();
  infer_cmd->add_option("--out", infer_args.out)->required();
  infer_cmd->add_option("--max-iters", infer_args.max_iters)->capture_default_str();

  SelectArgs select_args;
  auto* select_cmd = app.add_subcommand("select-parts", "Rank parts by usage and pick top K");
  select_cmd->add_option("--keypoints", select_args.keypoints)->required();
  select_cmd->add_option("--model", select_args.model)->required();
  select_cmd->add_option("--report", select_args.report)->required();
  select_cmd->add_option("--k", select_args.k, "Number of parts to keep")->capture_default_str();
  select_cmd->add_option("--lambda", select_args.lambda,
                         "Also emit square patches of side sqrt(lambda*W*H)");
  select_cmd->add_option("--out", select_args.out)->required();

  FilterArgs filter_args;
  auto* filter_cmd =
      app.add_subcommand("filter-boxes", "Keep boxes containing enough best-fitting parts");
  filter_cmd->add_option("--boxes", filter_args.boxes, "nac-boxes/1 input")->required();
  filter_cmd->add_option("--keypoints", filter_args.keypoints)->required();
  filter_cmd->add_option("--model", filter_args.model)->required();
  filter_cmd->add_option("--report", filter_args.report)->required();
  filter_cmd->add_option("--min-inside", filter_args.min_inside)->capture_default_str();
  filter_cmd->add_option("--best-parts", filter_args.best_parts)->capture_default_str();
  filter_cmd->add_option("--out", filter_args.out)->required();

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Generate keypoints from a random true model");
  synth_cmd->add_option("--images", synth_args.spec.images)->capture_default_str();
  synth_cmd->add_option("--proposals", synth_args.spec.parts)->capture_default_str();
  synth_cmd->add_option("--views", synth_args.spec.views)->capture_default_str();
  synth_cmd->add_option("--parts-per-view", synth_args.spec.parts_per_view)->capture_default_str();
  synth_cmd->add_option("--noise", synth_args.spec.noise_sigma)->capture_default_str();
  synth_cmd->add_option("--visibility", synth_args.spec.visibility_rate)->capture_default_str();
  synth_cmd->add_option("--informative", synth_args.spec.informative,
                        "Size of the part pool views draw from (0 = all)")
      ->capture_default_str();
  synth_cmd->add_option("--width", synth_args.spec.width)->capture_default_str();
  synth_cmd->add_option("--height", synth_args.spec.height)->capture_default_str();
  synth_cmd->add_option("--seed", synth_args.spec.rng_seed)->capture_default_str();
  synth_cmd->add_option("--out", synth_args.out, "nac-keypoints/1 output")->required();
  synth_cmd->add_option("--truth", synth_args.truth, "nac-model/1 ground truth")->required();
  synth_cmd->add_option("--truth-report", synth_args.truth_report,
                        "nac-report/1 with the true views and roots");

  OracleArgs oracle_args;
  auto* oracle_cmd = app.add_subcommand("oracle", "Exhaustive global minimum of tiny instances");
  oracle_cmd->add_option("--keypoints", oracle_args.keypoints)->required();
  oracle_cmd->add_option("--views", oracle_args.views)->capture_default_str();
  oracle_cmd->add_option("--parts-per-view", oracle_args.parts_per_view)->capture_default_str();
  oracle_cmd->add_option("--limit", oracle_args.limit, "Maximum number of assignments")
      ->capture_default_str();

  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(std::move(argv));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  }

  try {
    if (*fit_cmd) return run_fit(fit_args, out, err);
    if (*infer_cmd) return run_infer(infer_args, out, err);
    if (*select_cmd) return run_select(select_args, out, err);
    if (*filter_cmd) return run_filter(filter_args, out, err);
    if (*synth_cmd) return run_synth(synth_args, out, err);
    if (*oracle_cmd) return run_oracle(oracle_args, out, err);
  } catch (const ResourceBoundError& e) {
    err << "refused: " << e.what() << "\n";
    return kResource;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kConfig;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace nac::cli
