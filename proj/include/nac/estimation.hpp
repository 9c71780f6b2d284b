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
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nac/core.hpp"

namespace nac {

struct FitConfig {
  std::size_t views = 5;
  std::size_t parts_per_view = 10;
  std::size_t restarts = 5;
  std::size_t max_iters = 100;
  std::uint64_t rng_seed = 0;
};

/// Which coordinate update produced a descent-check event.
enum class UpdateStep { Shifts, Roots, Selection, Views };

inline const char* to_string(UpdateStep step) {
  switch (step) {
    case UpdateStep::Shifts: return "shifts";
    case UpdateStep::Roots: return "roots";
    case UpdateStep::Selection: return "selection";
    case UpdateStep::Views: return "views";
  }
  return "?";
}

struct DescentViolation {
  std::size_t restart = 0;
  std::size_t iteration = 0;
  UpdateStep step = UpdateStep::Shifts;
  double before = 0.0;
  double after = 0.0;
};

struct FitReport {
  ConstellationModel model;
  LatentState latent;
  double objective = 0.0;
  std::vector<std::size_t> iterations_per_restart;
  std::vector<double> restart_objectives;
  std::size_t best_restart = 0;
  // Every coordinate update is checked against the objective before it.
  std::size_t updates_checked = 0;
  std::vector<DescentViolation> descent_violations;
  std::size_t clamp_events = 0;
};

/// Absolute slack allowed by the descent check for floating-point noise.
inline constexpr double kDescentTolerance = 1e-12;

/// V x P table of per-(view, part) squared residuals.
struct ErrorTable {
  std::size_t views = 0;
  std::size_t parts = 0;
  std::vector<double> values;

  double operator()(std::size_t v, std::size_t p) const { return values[v * parts + p]; }
};

/// Best view for one image under a fixed model.
struct ViewChoice {
  std::size_t view = 0;
  Vec2 root;
  double error = 0.0;
};

namespace detail {

inline double clamp_unit(double x, std::size_t& clamped) {
  if (x < -1.0) {
    ++clamped;
    return -1.0;
  }
  if (x > 1.0) {
    ++clamped;
    return 1.0;
  }
  return x;
}

inline ConstellationModel update_shifts(std::span<const ProposalSet> data,
                                        const ConstellationModel& model,
                                        const LatentState& latent, std::size_t& clamped) {
  check_dimensions(data, model, latent);
  const std::size_t cells = model.num_views * model.num_parts;
  std::vector<Vec2> sums(cells);
  std::vector<std::size_t> support(cells, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t v = latent.view_of[i];
    for (std::size_t p = 0; p < model.num_parts; ++p) {
      if (!is_active(data[i], model, v, p)) continue;
      sums[model.index(v, p)] += data[i].locations[p] - latent.roots[i];
      ++support[model.index(v, p)];
    }
  }
  ConstellationModel out = model;
  for (std::size_t c = 0; c < cells; ++c) {
    if (support[c] == 0) continue;
    const Vec2 mean = sums[c] / static_cast<double>(support[c]);
    out.shifts[c] = {clamp_unit(mean.x, clamped), clamp_unit(mean.y, clamped)};
  }
  return out;
}

/// Optimal root of one image for a given view, or `fallback` when the view
/// has no visible selected part in the image.
inline Vec2 view_root(const ProposalSet& image, const ConstellationModel& model, std::size_t v,
                      Vec2 fallback) {
  Vec2 sum;
  std::size_t count = 0;
  for (std::size_t p = 0; p < model.num_parts; ++p) {
    if (!is_active(image, model, v, p)) continue;
    sum += image.locations[p] - model.shift(v, p);
    ++count;
  }
  return count == 0 ? fallback : sum / static_cast<double>(count);
}

}  // namespace detail

/// Mean offset between root and part location over the images that use
/// the part, clamped to [-1,1]^2. Unsupported (v,p) keep their shift.
inline ConstellationModel update_shifts(std::span<const ProposalSet> data,
                                        const ConstellationModel& model,
                                        const LatentState& latent) {
  std::size_t clamped = 0;
  return detail::update_shifts(data, model, latent, clamped);
}

/// Closed-form root update: mean of mu - d over the image's active parts.
inline LatentState update_roots(std::span<const ProposalSet> data, const ConstellationModel& model,
                                const LatentState& latent) {
  check_dimensions(data, model, latent);
  LatentState out = latent;
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.roots[i] = detail::view_root(data[i], model, latent.view_of[i], latent.roots[i]);
  }
  return out;
}

/// E(v,p): residual of part p summed over the visible images of view v,
/// irrespective of whether p is currently selected.
inline ErrorTable part_error_table(std::span<const ProposalSet> data,
                                   const ConstellationModel& model, const LatentState& latent) {
  check_dimensions(data, model, latent);
  ErrorTable table{model.num_views, model.num_parts,
                   std::vector<double>(model.num_views * model.num_parts, 0.0)};
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t v = latent.view_of[i];
    const ProposalSet& image = data[i];
    for (std::size_t p = 0; p < model.num_parts; ++p) {
      if (!image.is_visible(p)) continue;
      table.values[model.index(v, p)] +=
          squared_norm(image.locations[p] - latent.roots[i] - model.shift(v, p));
    }
  }
  return table;
}

/// Per view, marks the M parts with the smallest error. Ties go to the
/// lower part index.
inline std::vector<std::uint8_t> update_selection(const ErrorTable& table, std::size_t per_view) {
  if (per_view > table.parts) {
    throw ConfigError("cannot select " + std::to_string(per_view) + " of " +
                      std::to_string(table.parts) + " parts");
  }
  std::vector<std::uint8_t> mask(table.views * table.parts, 0);
  std::vector<std::size_t> order(table.parts);
  for (std::size_t v = 0; v < table.views; ++v) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(per_view),
                      order.end(), [&](std::size_t a, std::size_t b) {
                        const double ea = table(v, a);
                        const double eb = table(v, b);
                        return ea < eb || (ea == eb && a < b);
                      });
    for (std::size_t k = 0; k < per_view; ++k) mask[v * table.parts + order[k]] = 1;
  }
  return mask;
}

/// Jointly picks the view and root minimizing one image's error. Every
/// candidate view gets its own optimal root; ties go to the lower view.
inline ViewChoice assign_view(const ProposalSet& image, const ConstellationModel& model,
                              Vec2 previous_root) {
  ViewChoice best{0, previous_root, std::numeric_limits<double>::infinity()};
  for (std::size_t v = 0; v < model.num_views; ++v) {
    const Vec2 root = detail::view_root(image, model, v, previous_root);
    const double error = detail::image_error(image, model, v, root);
    if (error < best.error) best = {v, root, error};
  }
  return best;
}

inline LatentState update_views(std::span<const ProposalSet> data, const ConstellationModel& model,
                                const LatentState& latent) {
  check_dimensions(data, model, latent);
  LatentState out = latent;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const ViewChoice choice = assign_view(data[i], model, latent.roots[i]);
    out.view_of[i] = choice.view;
    out.roots[i] = choice.root;
  }
  return out;
}

namespace detail {

inline void check_config(std::span<const ProposalSet> data, const FitConfig& cfg) {
  if (data.empty()) throw ConfigError("no images to fit");
  const std::size_t parts = common_part_count(data);
  if (cfg.views < 1) throw ConfigError("need at least one view");
  if (cfg.parts_per_view < 1 || cfg.parts_per_view > parts) {
    throw ConfigError("parts per view must lie in [1, " + std::to_string(parts) + "], got " +
                      std::to_string(cfg.parts_per_view));
  }
  if (cfg.restarts < 1) throw ConfigError("need at least one restart");
  if (cfg.max_iters < 1) throw ConfigError("need at least one iteration");
}

inline std::mt19937_64 restart_engine(std::uint64_t seed, std::size_t restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  return std::mt19937_64(seq);
}

/// Uniform M-subset of [0, P) per view via a Fisher-Yates prefix.
inline void random_selection(ConstellationModel& model, std::mt19937_64& rng) {
  std::vector<std::size_t> perm(model.num_parts);
  for (std::size_t v = 0; v < model.num_views; ++v) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t k = 0; k < model.parts_per_view; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, model.num_parts - 1);
      std::swap(perm[k], perm[pick(rng)]);
      model.selected[model.index(v, perm[k])] = 1;
    }
  }
}

/// Mean offset of every part from the starting roots within each view, as if
/// all parts were selected. Gives unselected parts a fitted shift to compete
/// with, instead of the origin.
inline std::vector<Vec2> initial_shifts(std::span<const ProposalSet> data,
                                        const ConstellationModel& model,
                                        const LatentState& latent) {
  ConstellationModel all = model;
  std::fill(all.selected.begin(), all.selected.end(), std::uint8_t{1});
  std::size_t ignored = 0;
  return update_shifts(data, all, latent, ignored).shifts;
}

struct RestartResult {
  ConstellationModel model;
  LatentState latent;
  double objective = 0.0;
  std::size_t iterations = 0;
};

inline RestartResult run_restart(std::span<const ProposalSet> data, const FitConfig& cfg,
                                 std::size_t restart, FitReport& log) {
  const std::size_t parts = data.front().num_parts();
  std::mt19937_64 rng = restart_engine(cfg.rng_seed, restart);

  LatentState latent;
  latent.roots.assign(data.size(), kImageCenter);
  latent.view_of.resize(data.size());
  std::uniform_int_distribution<std::size_t> pick_view(0, cfg.views - 1);
  for (auto& v : latent.view_of) v = pick_view(rng);

  ConstellationModel model = ConstellationModel::empty(parts, cfg.views, cfg.parts_per_view);
  random_selection(model, rng);
  model.shifts = initial_shifts(data, model, latent);

  double current = objective(data, model, latent);
  std::size_t iteration = 0;
  auto checked = [&](UpdateStep step) {
    const double next = objective(data, model, latent);
    ++log.updates_checked;
    if (next > current + kDescentTolerance) {
      log.descent_violations.push_back({restart, iteration, step, current, next});
    }
    current = next;
  };

  while (iteration < cfg.max_iters) {
    ++iteration;
    model = detail::update_shifts(data, model, latent, log.clamp_events);
    checked(UpdateStep::Shifts);
    latent = update_roots(data, model, latent);
    checked(UpdateStep::Roots);
    auto selection = update_selection(part_error_table(data, model, latent), cfg.parts_per_view);
    const bool converged = selection == model.selected;
    model.selected = std::move(selection);
    checked(UpdateStep::Selection);
    latent = update_views(data, model, latent);
    checked(UpdateStep::Views);
    if (converged) break;
  }
  return {std::move(model), std::move(latent), current, iteration};
}

}  // namespace detail

/// Alternating minimization over shifts, roots, part selection and views,
/// repeated from `cfg.restarts` random initializations. Returns the restart
/// with the smallest objective (lowest index on ties). Pure in (data, cfg).
inline FitReport fit(std::span<const ProposalSet> data, const FitConfig& cfg) {
  detail::check_config(data, cfg);
  FitReport report;
  report.objective = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    detail::RestartResult result = detail::run_restart(data, cfg, r, report);
    report.iterations_per_restart.push_back(result.iterations);
    report.restart_objectives.push_back(result.objective);
    if (result.objective < report.objective) {
      report.objective = result.objective;
      report.best_restart = r;
      report.model = std::move(result.model);
      report.latent = std::move(result.latent);
    }
  }
  return report;
}

}  // namespace nac
