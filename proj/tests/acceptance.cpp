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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.
//
//   acceptance [WORK_DIR]

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nac/cli.hpp"
#include "nac/io.hpp"
#include "nac/nac.hpp"
#include "test_util.hpp"

namespace nac {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  int matched = 0;
  double worst_gap = 0.0;
  for (std::size_t k = 0; k < 25; ++k) {
    SynthSpec spec;
    spec.images = 3 + k % 2;
    spec.parts = 4 + (k / 2) % 2;
    spec.views = 1 + (k / 4) % 2;
    spec.parts_per_view = 1 + (k / 8) % 2;
    spec.rng_seed = k;
    const auto s = generate(spec);
    const auto oracle = oracle_fit(s.data, spec.views, spec.parts_per_view);
    const auto report = fit(s.data, FitConfig{spec.views, spec.parts_per_view, 20, 100, k});
    const double gap = std::abs(report.objective - oracle.best_objective);
    worst_gap = std::max(worst_gap, gap);
    if (gap <= 1e-9) ++matched;
  }
  const double elapsed = seconds_since(t0);
  return {matched >= 24 && elapsed < 60.0,
          fmt("%d/25 at the global minimum, worst gap %.3g, %.2f s", matched, worst_gap, elapsed)};
}

Outcome monotone_descent() {
  std::size_t violations = 0;
  std::size_t checked = 0;
  double worst_rise = 0.0;
  for (std::size_t k = 0; k < 100; ++k) {
    const std::size_t images = 20 + (k * 37) % 181;
    const std::size_t parts = 4 + (k * 13) % 61;
    const std::size_t views = 1 + k % 5;
    const std::size_t per_view = 1 + (k * 7) % std::min<std::size_t>(parts, 12);
    Dataset data;
    if (k % 2 == 0) {
      SynthSpec spec;
      spec.images = images;
      spec.parts = parts;
      spec.views = views;
      spec.parts_per_view = per_view;
      spec.noise_sigma = 0.01 + 0.01 * static_cast<double>(k % 7);
      spec.visibility_rate = 0.6 + 0.04 * static_cast<double>(k % 10);
      spec.rng_seed = 500 + k;
      data = generate(spec).data;
    } else {
      std::mt19937_64 rng(900 + k);
      data = testing::random_instance(rng, images, parts, views, per_view).data;
    }
    const auto report = fit(data, FitConfig{views, per_view, 3, 100, k});
    violations += report.descent_violations.size();
    checked += report.updates_checked;
    for (const auto& v : report.descent_violations) worst_rise = std::max(worst_rise, v.after - v.before);
  }
  return {violations == 0 && checked > 0,
          fmt("%zu violations in %zu checked updates, worst rise %.3g", violations, checked,
              worst_rise)};
}

Outcome synthetic_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  int exact_runs = 0;
  double min_agreement = 1.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SynthSpec spec;
    spec.images = 250;
    spec.parts = 30;
    spec.views = 5;
    spec.parts_per_view = 10;
    spec.noise_sigma = 0.02;
    spec.visibility_rate = 0.9;
    spec.rng_seed = seed;
    const auto s = generate(spec);
    const auto report = fit(s.data, FitConfig{5, 10, 20, 100, seed});
    const auto match = testing::match_views(report.model, s.truth);
    if (!match.all_exact) continue;
    ++exact_runs;
    min_agreement =
        std::min(min_agreement, testing::view_agreement(report.latent, s.truth_latent, match.perm));
  }
  const double elapsed = seconds_since(t0);
  const bool pass = exact_runs >= 19 && min_agreement >= 0.98 && elapsed < 300.0;
  return {pass, fmt("%d/20 seeds exact, min view agreement %.4f, %.1f s", exact_runs,
                    min_agreement, elapsed)};
}

Outcome gauge_invariance() {
  std::mt19937_64 rng(4242);
  std::bernoulli_distribution sign(0.5);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    ConstellationModel model;
    LatentState latent;
    Dataset data;
    if (trial % 2 == 0) {
      auto inst = testing::random_instance(rng, 40, 12, 3, 4);
      data = std::move(inst.data);
      model = std::move(inst.model);
      latent = std::move(inst.latent);
    } else {
      SynthSpec spec;
      spec.images = 60;
      spec.parts = 15;
      spec.views = 3;
      spec.parts_per_view = 5;
      spec.noise_sigma = 0.05;
      spec.visibility_rate = 0.8;
      spec.rng_seed = static_cast<std::uint64_t>(trial);
      data = generate(spec).data;
      auto report = fit(data, FitConfig{3, 5, 2, 100, static_cast<std::uint64_t>(trial)});
      model = std::move(report.model);
      latent = std::move(report.latent);
    }
    const double before = objective(data, model, latent);
    const std::size_t v = static_cast<std::size_t>(trial) % model.num_views;
    const Vec2 c{sign(rng) ? 0.01 : -0.01, sign(rng) ? 0.01 : -0.01};
    for (std::size_t p = 0; p < model.num_parts; ++p) model.shifts[model.index(v, p)] += c;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (latent.view_of[i] == v) latent.roots[i] = latent.roots[i] - c;
    }
    const double after = objective(data, model, latent);
    worst = std::max(worst, std::abs(after - before) / before);
  }
  return {worst < 1e-9, fmt("worst relative change %.3g over 50 configurations", worst)};
}

Outcome noise_free_zero() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthSpec spec;
    spec.noise_sigma = 0.0;
    spec.visibility_rate = 1.0;
    spec.rng_seed = seed;
    const auto s = generate(spec);
    const auto report = fit(s.data, FitConfig{spec.views, spec.parts_per_view, 20, 100, seed});
    worst = std::max(worst, report.objective);
  }
  return {worst < 1e-12, fmt("largest fitted objective %.3g over 10 seeds", worst)};
}

// Fraction of held-out images whose inferred view matches the true view,
// using a model in which every view selects `parts` with shifts estimated
// from the training fit.
double view_accuracy(std::span<const ProposalSet> train, std::span<const ProposalSet> test,
                     const FitReport& fitted, const LatentState& test_truth,
                     const std::vector<std::size_t>& perm, const std::vector<std::size_t>& parts) {
  ConstellationModel restricted =
      ConstellationModel::empty(fitted.model.num_parts, fitted.model.num_views, parts.size());
  for (std::size_t v = 0; v < restricted.num_views; ++v) {
    for (std::size_t p : parts) restricted.selected[restricted.index(v, p)] = 1;
  }
  restricted = update_shifts(train, restricted, fitted.latent);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (perm[infer(test[i], restricted).view] == test_truth.view_of[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

Outcome part_count_curve() {
  const std::vector<std::size_t> ks{2, 5, 10};
  std::vector<double> constellation(ks.size(), 0.0);
  std::vector<double> random(ks.size(), 0.0);
  constexpr int kSeeds = 10;
  constexpr int kRandomDraws = 10;
  constexpr std::size_t kTrain = 200;
  for (int seed = 0; seed < kSeeds; ++seed) {
    SynthSpec spec;
    spec.images = 2 * kTrain;
    spec.parts = 30;
    spec.informative = 10;
    spec.views = 3;
    spec.parts_per_view = 5;
    spec.noise_sigma = 0.02;
    spec.visibility_rate = 0.9;
    spec.rng_seed = 7000 + static_cast<std::uint64_t>(seed);
    const auto s = generate(spec);
    const std::span<const ProposalSet> all(s.data);
    const auto train = all.first(kTrain);
    const auto test = all.subspan(kTrain);
    LatentState test_truth;
    test_truth.view_of.assign(s.truth_latent.view_of.begin() + kTrain, s.truth_latent.view_of.end());

    const auto fitted = fit(train, FitConfig{3, 5, 20, 100, static_cast<std::uint64_t>(seed)});
    const auto perm = testing::match_views(fitted.model, s.truth).perm;
    const auto usage = count_part_usage(train, fitted.model, fitted.latent);
    std::mt19937_64 rng(31 + static_cast<std::uint64_t>(seed));
    std::vector<std::size_t> ids(spec.parts);
    for (std::size_t j = 0; j < ks.size(); ++j) {
      constellation[j] +=
          view_accuracy(train, test, fitted, test_truth, perm, top_k_parts(usage, ks[j])) / kSeeds;
      for (int draw = 0; draw < kRandomDraws; ++draw) {
        std::iota(ids.begin(), ids.end(), std::size_t{0});
        std::shuffle(ids.begin(), ids.end(), rng);
        std::vector<std::size_t> pick(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(ks[j]));
        std::sort(pick.begin(), pick.end());
        random[j] += view_accuracy(train, test, fitted, test_truth, perm, pick) /
                     (kSeeds * kRandomDraws);
      }
    }
  }
  bool pass = true;
  std::string detail;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    pass = pass && constellation[j] > random[j];
    detail += fmt("%sK=%zu %.3f vs %.3f", j == 0 ? "" : ", ", ks[j], constellation[j], random[j]);
  }
  return {pass, detail + " (constellation vs random)"};
}

// One 128x128 image. Parts 0-4 fit best, part 5 is selected but fits badly,
// part 6 is selected but hidden and part 7 is visible but unselected.
Outcome augmentation_filter(const testing::TempDir& dir) {
  const double w = 128.0;
  const std::vector<Vec2> pixels{{16, 16}, {112, 16}, {16, 112}, {112, 112}, {64, 64},
                                 {64, 16}, {40, 40},  {64, 112}};
  std::vector<Vec2> locations;
  for (Vec2 px : pixels) locations.push_back({px.x / w, px.y / w});
  const Dataset data{testing::make_image("img", locations, {1, 1, 1, 1, 1, 1, 0, 1}, 128, 128)};

  const Vec2 root{0.5, 0.5};
  ConstellationModel model = ConstellationModel::empty(8, 1, 7);
  for (std::size_t p = 0; p < 7; ++p) {
    model.selected[model.index(0, p)] = 1;
    // Residual vector of part p: distinct and small for 0-4, large for 5.
    const Vec2 residual{p < 5 ? static_cast<double>(p) / w : 0.25, 0.0};
    model.shifts[model.index(0, p)] = locations[p] - root - residual;
  }
  FitReport fitted;
  fitted.model = model;
  fitted.latent = {{root}, {0}};
  fitted.iterations_per_restart = {1};
  fitted.restart_objectives = {objective(data, model, fitted.latent)};
  fitted.objective = fitted.restart_objectives.front();

  // Boxes with the number of best-fitting parts each contains.
  const std::vector<std::pair<Box, int>> boxes{
      {{0, 0, 128, 128}, 5},      {{0, 0, 64, 64}, 2},        {{0, 0, 128, 64}, 3},
      {{0, 0, 128, 63.5}, 2},     {{0, 64, 128, 128}, 3},     {{0, 0, 64, 128}, 3},
      {{64, 0, 128, 128}, 3},     {{64.5, 0, 128, 128}, 2},   {{10, 10, 70, 120}, 3},
      {{10, 10, 70, 100}, 2},     {{16, 16, 112, 112}, 5},    {{16.5, 16, 112, 112}, 3},
      {{16.5, 16.5, 112, 112}, 2}, {{0, 0, 112, 20}, 2},      {{0, 30, 70, 128}, 2},
      {{60, 60, 128, 128}, 2},    {{30, 30, 50, 50}, 0},      {{60, 10, 120, 120}, 3},
      {{0, 100, 128, 128}, 2},    {{10, 10, 20, 20}, 1}};
  io::BoxFile input{{{"img", {}}}};
  io::BoxFile expected{{{"img", {}}}};
  for (const auto& [box, best_inside] : boxes) {
    input.images[0].boxes.push_back(box);
    if (best_inside >= 3) expected.images[0].boxes.push_back(box);
  }

  io::write_text(dir.file("filter_kp.json"), io::serialize(io::make_keypoint_file(data)));
  io::write_text(dir.file("filter_model.json"), io::serialize(model));
  io::write_text(dir.file("filter_report.json"), io::serialize(io::make_report(fitted, data)));
  io::write_text(dir.file("filter_boxes.json"), io::serialize(input));
  std::ostringstream out, err;
  const int code = cli::run({"filter-boxes", "--boxes", dir.file("filter_boxes.json"), "--keypoints",
                             dir.file("filter_kp.json"), "--model", dir.file("filter_model.json"),
                             "--report", dir.file("filter_report.json"), "--out",
                             dir.file("filter_kept.json")},
                            out, err);
  if (code != 0) return {false, "filter-boxes exited with " + std::to_string(code) + ": " + err.str()};
  const auto kept = io::parse_boxes(io::read_text(dir.file("filter_kept.json")));
  const bool pass = kept == expected && out.str() == fmt("img %zu/20\n", expected.images[0].boxes.size());
  return {pass, fmt("kept %zu of 20 boxes, expected %zu", kept.images.empty() ? 0 : kept.images[0].boxes.size(),
                    expected.images[0].boxes.size())};
}

// --- file round trip ---------------------------------------------------------

class Fuzzer {
 public:
  explicit Fuzzer(std::uint64_t seed) : rng_(seed) {}

  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  bool coin() { return std::bernoulli_distribution(0.5)(rng_); }

  // Mix of plain, boundary and many-digit values in [lo, hi].
  double real(double lo, double hi) {
    switch (index(0, 5)) {
      case 0: return lo;
      case 1: return hi;
      case 2: return 0.5 * (lo + hi);
      case 3: return std::max(lo, std::min(hi, std::ldexp(1.0, -static_cast<int>(index(1, 1000)))));
      default: return std::uniform_real_distribution<double>(lo, hi)(rng_);
    }
  }

  std::string id() {
    static const std::vector<std::string> pieces{"a", "Z", "0", "_", "-", " ", "\"", "\\", "/", "\n",
                                                 "\t", "é", "鳥", "\U0001F426", "."};
    std::string out;
    const std::size_t n = index(1, 12);
    for (std::size_t k = 0; k < n; ++k) out += pieces[index(0, pieces.size() - 1)];
    return out;
  }

  io::KeypointFile keypoints() {
    io::KeypointFile file;
    file.num_proposals = index(1, 8);
    const std::size_t images = index(0, 5);
    for (std::size_t i = 0; i < images; ++i) {
      ProposalSet image;
      image.meta = {id() + "#" + std::to_string(i), static_cast<std::int64_t>(index(1, 100000)),
                    static_cast<std::int64_t>(index(1, 100000))};
      for (std::size_t p = 0; p < file.num_proposals; ++p) {
        const bool visible = coin();
        image.visible.push_back(visible ? 1 : 0);
        image.locations.push_back(visible ? Vec2{real(0.0, 1.0), real(0.0, 1.0)}
                                          : Vec2{real(-1e6, 1e6), real(-1e6, 1e6)});
      }
      file.images.push_back(std::move(image));
    }
    return file;
  }

  ConstellationModel model() {
    const std::size_t parts = index(1, 12);
    ConstellationModel m = ConstellationModel::empty(parts, index(1, 5), index(1, parts));
    std::vector<std::size_t> ids(parts);
    for (std::size_t v = 0; v < m.num_views; ++v) {
      std::iota(ids.begin(), ids.end(), std::size_t{0});
      std::shuffle(ids.begin(), ids.end(), rng_);
      for (std::size_t k = 0; k < m.parts_per_view; ++k) {
        m.selected[m.index(v, ids[k])] = 1;
        m.shifts[m.index(v, ids[k])] = {real(-1.0, 1.0), real(-1.0, 1.0)};
      }
    }
    return m;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

using Mutation = std::function<bool(io::Json&, Fuzzer&)>;  // false if not applicable

io::Json& any_image(io::Json& doc, Fuzzer& f) {
  auto& images = doc["images"];
  return images[f.index(0, images.size() - 1)];
}

std::vector<Mutation> keypoint_mutations() {
  return {
      [](io::Json& d, Fuzzer&) { d.erase("format"); return true; },
      [](io::Json& d, Fuzzer&) { d["format"] = "nac-keypoints/0"; return true; },
      [](io::Json& d, Fuzzer&) { d.erase("images"); return true; },
      [](io::Json& d, Fuzzer&) { d.erase("num_proposals"); return true; },
      [](io::Json& d, Fuzzer&) { d["num_proposals"] = 0; return true; },
      [](io::Json& d, Fuzzer&) { d["num_proposals"] = 1.5; return true; },
      [](io::Json& d, Fuzzer&) { d["images"] = io::Json::object(); return true; },
      [](io::Json& d, Fuzzer& f) {
        if (d["images"].empty()) return false;
        static const char* keys[] = {"id", "width", "height", "points", "visible"};
        any_image(d, f).erase(keys[f.index(0, 4)]);
        return true;
      },
      [](io::Json& d, Fuzzer& f) {
        if (d["images"].empty()) return false;
        any_image(d, f)[f.coin() ? "width" : "height"] = f.coin() ? 0 : -3;
        return true;
      },
      [](io::Json& d, Fuzzer& f) {
        if (d["images"].empty()) return false;
        any_image(d, f)["width"] = f.coin() ? io::Json(12.5) : io::Json("12");
        return true;
      },
      [](io::Json& d, Fuzzer& f) {
        if (d["images"].empty()) return false;
        auto& image = any_image(d, f);
        image[f.coin() ? "points" : "visible"].erase(0);
        return true;
      },
      [](io::Json& d, Fuzzer& f) {
        if (d["images"].empty()) return false;
        any_image(d, f)["visible"].push_back(true);
        return true;
      },
      [](io::Json& d, Fuzzer& f) {
        if (d["images"].empty()) return false;
        auto& points = any_image(d, f)["points"];
        auto& point = points[f.index(0, points.size() - 1)];
        switch (f.index(0, 3)) {
          case 0: point.push_back(0.5); break;
          case 1: point.erase(1); break;
          case 2: point[0] = "0.5"; break;
          default: point = 0.5; break;
        }
        return true;
      },
      [](io::Json& d, Fuzzer& f) {
        if (d["images"].empty()) return false;
        auto& image = any_image(d, f);
        auto& visible = image["visible"];
        const std::size_t p = f.index(0, visible.size() - 1);
        visible[p] = true;
        image["points"][p][f.index(0, 1)] = f.coin() ? 1.0 + 1e-9 : -1e-300;
        return true;
      },
      [](io::Json& d, Fuzzer& f) {
        if (d["images"].empty()) return false;
        auto& visible = any_image(d, f)["visible"];
        visible[f.index(0, visible.size() - 1)] = f.coin() ? io::Json(1) : io::Json("true");
        return true;
      },
      [](io::Json& d, Fuzzer&) {
        auto& images = d["images"];
        if (images.size() < 2) return false;
        images[1]["id"] = images[0]["id"];
        return true;
      },
      [](io::Json& d, Fuzzer& f) {
        if (d["images"].empty()) return false;
        any_image(d, f)["id"] = f.coin() ? io::Json("") : io::Json(7);
        return true;
      },
  };
}

std::vector<Mutation> model_mutations() {
  auto any_view = [](io::Json& d, Fuzzer& f) -> io::Json& {
    auto& views = d["views"];
    return views[f.index(0, views.size() - 1)];
  };
  return {
      [](io::Json& d, Fuzzer&) { d["format"] = "nac-keypoints/1"; return true; },
      [](io::Json& d, Fuzzer& f) {
        static const char* keys[] = {"format", "P", "V", "M", "views"};
        d.erase(keys[f.index(0, 4)]);
        return true;
      },
      [](io::Json& d, Fuzzer&) { d["P"] = 0; return true; },
      [](io::Json& d, Fuzzer&) {
        d["M"] = d["P"].get<std::int64_t>() + 1;
        return true;
      },
      [](io::Json& d, Fuzzer&) { d["V"] = d["V"].get<std::int64_t>() + 1; return true; },
      [](io::Json& d, Fuzzer&) { d["views"].erase(0); return true; },
      [any_view](io::Json& d, Fuzzer& f) {
        auto& view = any_view(d, f);
        view[f.coin() ? "parts" : "shifts"].push_back(view["shifts"][0]);
        return true;
      },
      [any_view](io::Json& d, Fuzzer& f) {
        any_view(d, f).erase(f.coin() ? "parts" : "shifts");
        return true;
      },
      [any_view](io::Json& d, Fuzzer& f) {
        auto& parts = any_view(d, f)["parts"];
        parts[f.index(0, parts.size() - 1)] = f.coin() ? d["P"].get<std::int64_t>() : -1;
        return true;
      },
      [any_view](io::Json& d, Fuzzer& f) {
        auto& parts = any_view(d, f)["parts"];
        if (parts.size() < 2) return false;
        std::swap(parts[0], parts[1]);
        return true;
      },
      [any_view](io::Json& d, Fuzzer& f) {
        auto& parts = any_view(d, f)["parts"];
        if (parts.size() < 2) return false;
        parts[1] = parts[0];
        return true;
      },
      [any_view](io::Json& d, Fuzzer& f) {
        auto& shifts = any_view(d, f)["shifts"];
        shifts[f.index(0, shifts.size() - 1)][f.index(0, 1)] = f.coin() ? 1.0 + 1e-12 : -2.0;
        return true;
      },
      [any_view](io::Json& d, Fuzzer& f) {
        auto& shifts = any_view(d, f)["shifts"];
        shifts[f.index(0, shifts.size() - 1)] = io::Json::array({0.0});
        return true;
      },
  };
}

// A diagnostic names the line and, for structural problems, a JSON pointer.
bool is_diagnostic(const std::string& msg) {
  if (msg.rfind("line ", 0) != 0) return false;
  std::size_t k = 5;
  while (k < msg.size() && std::isdigit(static_cast<unsigned char>(msg[k]))) ++k;
  return k > 5 && k + 2 < msg.size() && msg.compare(k, 2, ": ") == 0;
}

template <typename Parse>
bool rejected_with_diagnostic(const std::string& text, Parse parse, std::string& why) {
  try {
    parse(text);
  } catch (const ValidationError& e) {
    if (is_diagnostic(e.what())) return true;
    why = std::string("diagnostic without location: ") + e.what();
    return false;
  } catch (const std::exception& e) {
    why = std::string("wrong exception: ") + e.what();
    return false;
  }
  why = "accepted:\n" + text;
  return false;
}

// Applies a random applicable mutation, or truncates the text.
template <typename Parse>
bool mutate_and_check(const std::string& valid, const std::vector<Mutation>& mutations, Fuzzer& f,
                      Parse parse, std::size_t& tried, std::string& why) {
  if (f.index(0, 4) == 0) {
    const std::size_t cut = f.index(0, valid.rfind('}'));
    ++tried;
    return rejected_with_diagnostic(valid.substr(0, cut), parse, why);
  }
  for (;;) {
    io::Json doc = io::Json::parse(valid);
    if (!mutations[f.index(0, mutations.size() - 1)](doc, f)) continue;
    ++tried;
    return rejected_with_diagnostic(doc.dump(2), parse, why);
  }
}

Outcome file_round_trip() {
  Fuzzer f(2718);
  const auto kp_mutations = keypoint_mutations();
  const auto model_mutations_list = model_mutations();
  std::size_t valid_ok = 0;
  std::size_t invalid_total = 0;
  std::size_t invalid_ok = 0;
  std::string first_problem;
  auto note = [&](const std::string& what) {
    if (first_problem.empty()) first_problem = what;
  };
  for (int k = 0; k < 1000; ++k) {
    const auto kp = f.keypoints();
    const std::string kp_text = io::serialize(kp);
    try {
      const auto back = io::parse_keypoints(kp_text);
      if (back == kp && io::serialize(back) == kp_text) {
        ++valid_ok;
      } else {
        note("keypoint round trip changed the file:\n" + kp_text);
      }
    } catch (const std::exception& e) {
      note(std::string("valid keypoints rejected: ") + e.what());
    }

    const auto model = f.model();
    const std::string model_text = io::serialize(model);
    try {
      const auto back = io::parse_model(model_text);
      if (io::same_model(back, model) && io::serialize(back) == model_text) {
        ++valid_ok;
      } else {
        note("model round trip changed the file:\n" + model_text);
      }
    } catch (const std::exception& e) {
      note(std::string("valid model rejected: ") + e.what());
    }

    std::string why;
    if (mutate_and_check(kp_text, kp_mutations, f, io::parse_keypoints, invalid_total, why)) {
      ++invalid_ok;
    } else {
      note(why);
    }
    why.clear();
    if (mutate_and_check(model_text, model_mutations_list, f, io::parse_model, invalid_total, why)) {
      ++invalid_ok;
    } else {
      note(why);
    }
  }
  const bool pass = valid_ok == 2000 && invalid_ok == invalid_total;
  std::string detail = fmt("%zu/2000 valid files round-trip, %zu/%zu mutations rejected with a line",
                           valid_ok, invalid_ok, invalid_total);
  if (!first_problem.empty()) detail += "; first problem: " + first_problem.substr(0, 300);
  return {pass, detail};
}

}  // namespace
}  // namespace nac

int main(int argc, char** argv) {
  using namespace nac;
  const testing::TempDir work = argc > 1 ? testing::TempDir(std::filesystem::path(argv[1]))
                                         : testing::TempDir();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle_equivalence", oracle_equivalence},
      {"monotone_descent", monotone_descent},
      {"synthetic_recovery", synthetic_recovery},
      {"gauge_invariance", gauge_invariance},
      {"noise_free_zero", noise_free_zero},
      {"part_count_curve", part_count_curve},
      {"augmentation_filter", [&] { return augmentation_filter(work); }},
      {"file_round_trip", file_round_trip},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::cout << (outcome.pass ? "PASS " : "FAIL ") << name << ": " << outcome.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
