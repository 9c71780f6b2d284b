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

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

/// Constellations of part proposals: a multi-view star model over
/// per-image keypoints, fitted by alternating exact minimization.
namespace nac {

// Error hierarchy. The CLI maps these onto exit codes.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mismatched sizes between data, model and latent state.
struct StructuralError : Error {
  using Error::Error;
};

/// An argument outside the domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

/// Invalid fit/synth configuration.
struct ConfigError : Error {
  using Error::Error;
};

/// Malformed or invariant-violating input file.
struct ValidationError : Error {
  using Error::Error;
};

/// Refusal to run an enumeration that exceeds its bound.
struct ResourceBoundError : Error {
  using Error::Error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
  constexpr Vec2& operator+=(Vec2 b) {
    x += b.x;
    y += b.y;
    return *this;
  }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double squared_norm(Vec2 v) { return v.x * v.x + v.y * v.y; }

inline constexpr Vec2 kImageCenter{0.5, 0.5};

struct ImageMeta {
  std::string image_id;
  std::int64_t width = 1;
  std::int64_t height = 1;

  friend bool operator==(const ImageMeta&, const ImageMeta&) = default;
};

/// Normalized keypoint locations of P part proposals in one image.
/// Locations of hidden proposals carry no meaning and are never read.
struct ProposalSet {
  ImageMeta meta;
  std::vector<Vec2> locations;
  std::vector<std::uint8_t> visible;

  std::size_t num_parts() const { return locations.size(); }
  bool is_visible(std::size_t p) const { return visible[p] != 0; }

  friend bool operator==(const ProposalSet&, const ProposalSet&) = default;
};

using Dataset = std::vector<ProposalSet>;

/// V views, each selecting exactly M of the P proposals with a shift
/// vector per (view, part). Shifts of unselected parts are retained but
/// ignored by every consumer.
struct ConstellationModel {
  std::size_t num_parts = 0;
  std::size_t num_views = 0;
  std::size_t parts_per_view = 0;
  std::vector<std::uint8_t> selected;  // V x P, row-major
  std::vector<Vec2> shifts;            // V x P, row-major

  /// A model with no parts selected and zero shifts; callers fill `selected`.
  static ConstellationModel empty(std::size_t parts, std::size_t views, std::size_t per_view) {
    ConstellationModel m;
    m.num_parts = parts;
    m.num_views = views;
    m.parts_per_view = per_view;
    m.selected.assign(views * parts, 0);
    m.shifts.assign(views * parts, Vec2{});
    return m;
  }

  std::size_t index(std::size_t v, std::size_t p) const { return v * num_parts + p; }
  bool is_selected(std::size_t v, std::size_t p) const { return selected[index(v, p)] != 0; }
  Vec2 shift(std::size_t v, std::size_t p) const { return shifts[index(v, p)]; }

  /// Selected part indices of view v, ascending.
  std::vector<std::size_t> parts_of(std::size_t v) const {
    std::vector<std::size_t> out;
    out.reserve(parts_per_view);
    for (std::size_t p = 0; p < num_parts; ++p) {
      if (is_selected(v, p)) out.push_back(p);
    }
    return out;
  }

  /// Throws StructuralError unless sizes agree, every view selects exactly
  /// M parts and every shift lies in [-1,1]^2.
  void check() const {
    if (num_views < 1) throw StructuralError("model has no views");
    if (selected.size() != num_views * num_parts || shifts.size() != num_views * num_parts) {
      throw StructuralError("model arrays do not match V x P");
    }
    for (std::size_t v = 0; v < num_views; ++v) {
      std::size_t count = 0;
      for (std::size_t p = 0; p < num_parts; ++p) {
        if (is_selected(v, p)) ++count;
        const Vec2 d = shift(v, p);
        if (!(d.x >= -1.0 && d.x <= 1.0 && d.y >= -1.0 && d.y <= 1.0)) {
          throw StructuralError("shift of view " + std::to_string(v) + " part " +
                                std::to_string(p) + " outside [-1,1]^2");
        }
      }
      if (count != parts_per_view) {
        throw StructuralError("view " + std::to_string(v) + " selects " + std::to_string(count) +
                              " parts, expected " + std::to_string(parts_per_view));
      }
    }
  }
};

/// Per-image root point and active view.
struct LatentState {
  std::vector<Vec2> roots;
  std::vector<std::size_t> view_of;

  std::size_t size() const { return roots.size(); }

  friend bool operator==(const LatentState&, const LatentState&) = default;
};

/// t_{i,v,p} for the image's own view: part p is selected in the image's
/// view and visible in the image.
inline bool is_active(const ProposalSet& image, const ConstellationModel& model, std::size_t view,
                      std::size_t p) {
  return model.is_selected(view, p) && image.is_visible(p);
}

/// Common proposal count of a dataset; throws StructuralError when images
/// disagree or an image's arrays have different lengths.
inline std::size_t common_part_count(std::span<const ProposalSet> data) {
  if (data.empty()) return 0;
  const std::size_t parts = data.front().num_parts();
  for (const auto& image : data) {
    if (image.locations.size() != image.visible.size()) {
      throw StructuralError("image '" + image.meta.image_id +
                            "': locations and visibility differ in length");
    }
    if (image.num_parts() != parts) {
      throw StructuralError("image '" + image.meta.image_id + "' has " +
                            std::to_string(image.num_parts()) + " proposals, expected " +
                            std::to_string(parts));
    }
  }
  return parts;
}

inline void check_dimensions(std::span<const ProposalSet> data, const ConstellationModel& model,
                             const LatentState& latent) {
  const std::size_t parts = common_part_count(data);
  if (!data.empty() && parts != model.num_parts) {
    throw StructuralError("data has " + std::to_string(parts) + " proposals, model has " +
                          std::to_string(model.num_parts));
  }
  if (model.selected.size() != model.num_views * model.num_parts ||
      model.shifts.size() != model.num_views * model.num_parts) {
    throw StructuralError("model arrays do not match V x P");
  }
  if (latent.roots.size() != data.size() || latent.view_of.size() != data.size()) {
    throw StructuralError("latent state sized " + std::to_string(latent.roots.size()) + "/" +
                          std::to_string(latent.view_of.size()) + " for " +
                          std::to_string(data.size()) + " images");
  }
  for (std::size_t i = 0; i < latent.view_of.size(); ++i) {
    if (latent.view_of[i] >= model.num_views) {
      throw StructuralError("image " + std::to_string(i) + " assigned to view " +
                            std::to_string(latent.view_of[i]) + " of " +
                            std::to_string(model.num_views));
    }
  }
}

namespace detail {

inline double image_error(const ProposalSet& image, const ConstellationModel& model,
                          std::size_t view, Vec2 root) {
  double sum = 0.0;
  for (std::size_t p = 0; p < model.num_parts; ++p) {
    if (is_active(image, model, view, p)) {
      sum += squared_norm(image.locations[p] - root - model.shift(view, p));
    }
  }
  return sum;
}

}  // namespace detail

/// Sum over images of the squared residuals of every visible part selected
/// in the image's view.
inline double objective(std::span<const ProposalSet> data, const ConstellationModel& model,
                        const LatentState& latent) {
  check_dimensions(data, model, latent);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += detail::image_error(data[i], model, latent.view_of[i], latent.roots[i]);
  }
  return total;
}

/// Contribution of image i alone to the objective.
inline double image_objective(std::span<const ProposalSet> data, std::size_t i,
                              const ConstellationModel& model, const LatentState& latent) {
  check_dimensions(data, model, latent);
  if (i >= data.size()) throw DomainError("image index out of range");
  return detail::image_error(data[i], model, latent.view_of[i], latent.roots[i]);
}

/// ||mu_{i,p} - a_i - d_{v,p}||^2 under the image's assigned view.
/// Throws DomainError when part p is hidden in image i.
inline double residual(std::span<const ProposalSet> data, std::size_t i, std::size_t p,
                       const ConstellationModel& model, const LatentState& latent) {
  check_dimensions(data, model, latent);
  if (i >= data.size()) throw DomainError("image index out of range");
  if (p >= model.num_parts) throw DomainError("part index out of range");
  const ProposalSet& image = data[i];
  if (!image.is_visible(p)) {
    throw DomainError("part " + std::to_string(p) + " is hidden in image '" +
                      image.meta.image_id + "'");
  }
  const std::size_t v = latent.view_of[i];
  return squared_norm(image.locations[p] - latent.roots[i] - model.shift(v, p));
}

}  // namespace nac
