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
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nac/core.hpp"

namespace nac {

/// Parameters of the generative model: selected parts are Gaussian around
/// root + shift, unselected parts uniform on the unit square.
struct SynthSpec {
  std::size_t images = 100;
  std::size_t parts = 30;
  std::size_t views = 5;
  std::size_t parts_per_view = 10;
  double noise_sigma = 0.02;
  double visibility_rate = 1.0;
  std::uint64_t rng_seed = 0;
  std::int64_t width = 224;
  std::int64_t height = 224;
  // Views draw their parts from a random pool of this many proposals;
  // 0 means the pool is every proposal.
  std::size_t informative = 0;
};

struct SynthResult {
  Dataset data;
  ConstellationModel truth;
  LatentState truth_latent;
  std::vector<std::size_t> pool;      // ascending
  std::size_t clipped_coordinates = 0;
};

inline constexpr double kTruthShiftRange = 0.25;
inline constexpr double kTruthRootLow = 0.3;
inline constexpr double kTruthRootHigh = 0.7;

inline void check_spec(const SynthSpec& spec) {
  const std::size_t pool = spec.informative == 0 ? spec.parts : spec.informative;
  if (spec.views < 1) throw ConfigError("need at least one view");
  if (spec.parts_per_view < 1 || spec.parts_per_view > pool || pool > spec.parts) {
    throw ConfigError("need 1 <= parts per view <= informative pool <= parts");
  }
  if (!(spec.noise_sigma >= 0.0)) throw ConfigError("noise sigma must be non-negative");
  if (!(spec.visibility_rate >= 0.0 && spec.visibility_rate <= 1.0)) {
    throw ConfigError("visibility rate must lie in [0, 1]");
  }
  if (spec.width < 1 || spec.height < 1) throw ConfigError("image size must be positive");
}

/// Samples a ground-truth model, per-image latents and the keypoints they
/// generate. Deterministic in the spec.
inline SynthResult generate(const SynthSpec& spec) {
  check_spec(spec);
  std::mt19937_64 rng(spec.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> shift(-kTruthShiftRange, kTruthShiftRange);
  std::uniform_real_distribution<double> root(kTruthRootLow, kTruthRootHigh);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution visible(spec.visibility_rate);
  std::uniform_int_distribution<std::size_t> pick_view(0, spec.views - 1);

  SynthResult out;
  std::vector<std::size_t> perm(spec.parts);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  const std::size_t pool_size = spec.informative == 0 ? spec.parts : spec.informative;
  for (std::size_t k = 0; k < pool_size; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, spec.parts - 1);
    std::swap(perm[k], perm[pick(rng)]);
  }
  out.pool.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(pool_size));
  std::sort(out.pool.begin(), out.pool.end());

  out.truth = ConstellationModel::empty(spec.parts, spec.views, spec.parts_per_view);
  std::vector<std::size_t> candidates;
  for (std::size_t v = 0; v < spec.views; ++v) {
    candidates = out.pool;
    for (std::size_t k = 0; k < spec.parts_per_view; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, candidates.size() - 1);
      std::swap(candidates[k], candidates[pick(rng)]);
      const std::size_t p = candidates[k];
      out.truth.selected[out.truth.index(v, p)] = 1;
      out.truth.shifts[out.truth.index(v, p)] = {shift(rng), shift(rng)};
    }
  }

  const auto clip = [&out](double x) {
    if (x < 0.0 || x > 1.0) ++out.clipped_coordinates;
    return std::clamp(x, 0.0, 1.0);
  };
  char id[32];
  for (std::size_t i = 0; i < spec.images; ++i) {
    const std::size_t v = pick_view(rng);
    const Vec2 a{root(rng), root(rng)};
    out.truth_latent.view_of.push_back(v);
    out.truth_latent.roots.push_back(a);

    ProposalSet image;
    std::snprintf(id, sizeof id, "img_%05zu", i);
    image.meta = {id, spec.width, spec.height};
    image.locations.resize(spec.parts);
    image.visible.resize(spec.parts);
    for (std::size_t p = 0; p < spec.parts; ++p) {
      if (out.truth.is_selected(v, p)) {
        const Vec2 center = a + out.truth.shift(v, p);
        const double nx = gauss(rng);
        const double ny = gauss(rng);
        image.locations[p] = {clip(center.x + spec.noise_sigma * nx),
                              clip(center.y + spec.noise_sigma * ny)};
      } else {
        image.locations[p] = {unit(rng), unit(rng)};
      }
      image.visible[p] = visible(rng) ? 1 : 0;
    }
    out.data.push_back(std::move(image));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exhaustive oracle

/// One feasible discrete assignment: part selection and view per image.
struct OracleAssignment {
  std::vector<std::uint8_t> selected;  // V x P
  std::vector<std::size_t> view_of;

  friend bool operator==(const OracleAssignment&, const OracleAssignment&) = default;
};

struct OracleResult {
  double best_objective = std::numeric_limits<double>::infinity();
  std::size_t enumerated = 0;
  std::size_t argmin_count = 0;
  std::vector<OracleAssignment> argmin;  // first `max_argmin` in enumeration order
};

struct OracleOptions {
  double max_enumeration = 1e6;
  double movement_tolerance = 1e-13;
  std::size_t max_passes = 200000;
  double tie_tolerance = 1e-12;
  std::size_t max_argmin = 1024;
};

/// Roots and shifts minimizing the objective for a fixed discrete
/// assignment, found by exact alternating coordinate minimization.
struct OffsetSolution {
  std::vector<Vec2> roots;
  std::vector<Vec2> shifts;  // V x P
  double objective = 0.0;
  std::size_t passes = 0;
};

namespace oracle_detail {

inline bool uses(const ProposalSet& image, std::span<const std::uint8_t> selected,
                 std::size_t parts, std::size_t view, std::size_t p) {
  return selected[view * parts + p] != 0 && image.visible[p] != 0;
}

inline double evaluate(std::span<const ProposalSet> data, std::span<const std::uint8_t> selected,
                       std::span<const std::size_t> view_of, std::span<const Vec2> roots,
                       std::span<const Vec2> shifts, std::size_t parts) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t p = 0; p < parts; ++p) {
      if (!uses(data[i], selected, parts, view_of[i], p)) continue;
      const Vec2 r = data[i].locations[p] - roots[i] - shifts[view_of[i] * parts + p];
      total += r.x * r.x + r.y * r.y;
    }
  }
  return total;
}

inline double binomial(std::size_t n, std::size_t k) {
  double c = 1.0;
  for (std::size_t j = 1; j <= k; ++j) c = c * static_cast<double>(n - k + j) / static_cast<double>(j);
  return std::round(c);
}

inline std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> c(k);
  std::iota(c.begin(), c.end(), std::size_t{0});
  while (true) {
    out.push_back(c);
    std::size_t j = k;
    while (j > 0 && c[j - 1] == n - k + j - 1) --j;
    if (j == 0) break;
    ++c[j - 1];
    for (std::size_t t = j; t < k; ++t) c[t] = c[t - 1] + 1;
  }
  return out;
}

}  // namespace oracle_detail

/// Alternates closed-form shift and root updates from centered roots until
/// no coordinate moves more than the tolerance. When `pass_objectives` is
/// given, the objective after every pass is appended to it.
inline OffsetSolution solve_offsets(std::span<const ProposalSet> data,
                                    std::span<const std::uint8_t> selected,
                                    std::span<const std::size_t> view_of, std::size_t views,
                                    const OracleOptions& options = {},
                                    std::vector<double>* pass_objectives = nullptr) {
  const std::size_t parts = common_part_count(data);
  if (selected.size() != views * parts || view_of.size() != data.size()) {
    throw StructuralError("assignment does not match data");
  }
  OffsetSolution sol;
  sol.roots.assign(data.size(), kImageCenter);
  sol.shifts.assign(views * parts, Vec2{});
  std::vector<Vec2> sums;
  std::vector<std::size_t> counts;
  while (sol.passes < options.max_passes) {
    ++sol.passes;
    double movement = 0.0;
    const auto move = [&movement](Vec2& target, Vec2 value) {
      movement = std::max({movement, std::abs(value.x - target.x), std::abs(value.y - target.y)});
      target = value;
    };

    sums.assign(views * parts, Vec2{});
    counts.assign(views * parts, 0);
    for (std::size_t i = 0; i < data.size(); ++i) {
      for (std::size_t p = 0; p < parts; ++p) {
        if (!oracle_detail::uses(data[i], selected, parts, view_of[i], p)) continue;
        sums[view_of[i] * parts + p] += data[i].locations[p] - sol.roots[i];
        ++counts[view_of[i] * parts + p];
      }
    }
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (counts[c] > 0) move(sol.shifts[c], sums[c] / static_cast<double>(counts[c]));
    }

    for (std::size_t i = 0; i < data.size(); ++i) {
      Vec2 sum;
      std::size_t n = 0;
      for (std::size_t p = 0; p < parts; ++p) {
        if (!oracle_detail::uses(data[i], selected, parts, view_of[i], p)) continue;
        sum += data[i].locations[p] - sol.shifts[view_of[i] * parts + p];
        ++n;
      }
      if (n > 0) move(sol.roots[i], sum / static_cast<double>(n));
    }

    if (pass_objectives != nullptr) {
      pass_objectives->push_back(
          oracle_detail::evaluate(data, selected, view_of, sol.roots, sol.shifts, parts));
    }
    if (movement < options.movement_tolerance) break;
  }
  sol.objective = oracle_detail::evaluate(data, selected, view_of, sol.roots, sol.shifts, parts);
  return sol;
}

/// Number of (selection, view assignment) pairs oracle_fit would visit.
inline double oracle_enumeration_size(std::size_t images, std::size_t parts, std::size_t views,
                                      std::size_t per_view) {
  return std::pow(oracle_detail::binomial(parts, per_view), static_cast<double>(views)) *
         std::pow(static_cast<double>(views), static_cast<double>(images));
}

/// Global minimum of the objective over every feasible part selection and
/// view assignment, each solved exactly in roots and shifts. Refuses
/// instances above `options.max_enumeration`.
inline OracleResult oracle_fit(std::span<const ProposalSet> data, std::size_t views,
                               std::size_t per_view, const OracleOptions& options = {}) {
  if (data.empty()) throw ConfigError("no images");
  const std::size_t parts = common_part_count(data);
  if (views < 1 || per_view < 1 || per_view > parts) throw ConfigError("invalid V or M");
  const double size = oracle_enumeration_size(data.size(), parts, views, per_view);
  if (size > options.max_enumeration) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "refusing to enumerate %.6g assignments (limit %.6g)", size,
                  options.max_enumeration);
    throw ResourceBoundError(msg);
  }

  const auto combos = oracle_detail::combinations(parts, per_view);
  const std::size_t n = data.size();
  std::vector<std::size_t> combo_of(views, 0);
  std::vector<std::size_t> view_of(n, 0);
  std::vector<std::uint8_t> selected(views * parts, 0);
  std::vector<double> objectives;
  objectives.reserve(static_cast<std::size_t>(size));

  const auto build_selection = [&] {
    std::fill(selected.begin(), selected.end(), 0);
    for (std::size_t v = 0; v < views; ++v) {
      for (std::size_t p : combos[combo_of[v]]) selected[v * parts + p] = 1;
    }
  };
  // Odometer helper: increments a mixed-radix counter, false on wraparound.
  const auto advance = [](std::vector<std::size_t>& digits, std::size_t radix) {
    for (auto& d : digits) {
      if (++d < radix) return true;
      d = 0;
    }
    return false;
  };

  do {
    build_selection();
    std::fill(view_of.begin(), view_of.end(), 0);
    do {
      objectives.push_back(solve_offsets(data, selected, view_of, views, options).objective);
    } while (advance(view_of, views));
  } while (advance(combo_of, combos.size()));

  OracleResult result;
  result.enumerated = objectives.size();
  result.best_objective = *std::min_element(objectives.begin(), objectives.end());
  const std::size_t s_count = objectives.size() / static_cast<std::size_t>(std::pow(
                                  static_cast<double>(combos.size()), static_cast<double>(views)));
  for (std::size_t idx = 0; idx < objectives.size(); ++idx) {
    if (objectives[idx] > result.best_objective + options.tie_tolerance) continue;
    ++result.argmin_count;
    if (result.argmin.size() >= options.max_argmin) continue;
    std::size_t s_code = idx % s_count;
    std::size_t b_code = idx / s_count;
    for (std::size_t v = 0; v < views; ++v) {
      combo_of[v] = b_code % combos.size();
      b_code /= combos.size();
    }
    for (std::size_t i = 0; i < n; ++i) {
      view_of[i] = s_code % views;
      s_code /= views;
    }
    build_selection();
    result.argmin.push_back({selected, view_of});
  }
  return result;
}

}  // namespace nac
