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
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "nac/core.hpp"

namespace nac {

/// Axis-aligned rectangle in pixel coordinates.
struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }

  /// Boundary-inclusive.
  bool contains(Vec2 point) const {
    return point.x >= x0 && point.x <= x1 && point.y >= y0 && point.y <= y1;
  }

  bool inside(const ImageMeta& meta) const {
    return x0 >= 0.0 && y0 >= 0.0 && x1 <= static_cast<double>(meta.width) &&
           y1 <= static_cast<double>(meta.height);
  }

  friend bool operator==(const Box&, const Box&) = default;
};

struct BoxSet {
  std::string image_id;
  std::vector<Box> boxes;

  friend bool operator==(const BoxSet&, const BoxSet&) = default;
};

/// Part locations of one image, in pixels.
struct PixelPoints {
  std::string image_id;
  std::vector<Vec2> points;
};

/// Number of images in which each part is selected by the image's view
/// and visible.
inline std::vector<std::size_t> count_part_usage(std::span<const ProposalSet> data,
                                                 const ConstellationModel& model,
                                                 const LatentState& latent) {
  check_dimensions(data, model, latent);
  std::vector<std::size_t> counts(model.num_parts, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t p = 0; p < model.num_parts; ++p) {
      if (is_active(data[i], model, latent.view_of[i], p)) ++counts[p];
    }
  }
  return counts;
}

/// Indices of the K largest counts in descending order; ties go to the
/// lower index. K is capped at the number of parts.
inline std::vector<std::size_t> top_k_parts(std::span<const std::size_t> counts, std::size_t k) {
  std::vector<std::size_t> order(counts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t take = std::min(k, counts.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return counts[a] > counts[b] || (counts[a] == counts[b] && a < b);
                    });
  order.resize(take);
  return order;
}

/// Square patch of side round(sqrt(lambda * W * H)) centered on a
/// normalized point. The side is capped at min(W, H) and the window is
/// translated, never shrunk, to fit inside the image.
inline Box patch_box(Vec2 center, const ImageMeta& meta, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("patch scale must be positive");
  const double w = static_cast<double>(meta.width);
  const double h = static_cast<double>(meta.height);
  const double side = std::min(std::round(std::sqrt(lambda * w * h)), std::min(w, h));
  const auto place = [side](double c, double extent) {
    return std::clamp(c - side / 2.0, 0.0, extent - side);
  };
  const double x0 = place(center.x * w, w);
  const double y0 = place(center.y * h, h);
  return {x0, y0, x0 + side, y0 + side};
}

/// Up to n active parts of image i with the smallest residual, ascending by
/// residual then index.
inline std::vector<std::size_t> best_fitting_parts(std::span<const ProposalSet> data,
                                                   std::size_t i, const ConstellationModel& model,
                                                   const LatentState& latent, std::size_t n = 5) {
  check_dimensions(data, model, latent);
  if (i >= data.size()) throw DomainError("image index out of range");
  const ProposalSet& image = data[i];
  const std::size_t v = latent.view_of[i];
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t p = 0; p < model.num_parts; ++p) {
    if (!is_active(image, model, v, p)) continue;
    ranked.emplace_back(squared_norm(image.locations[p] - latent.roots[i] - model.shift(v, p)), p);
  }
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::size_t> parts;
  for (std::size_t k = 0; k < std::min(n, ranked.size()); ++k) parts.push_back(ranked[k].second);
  return parts;
}

/// Normalized locations of the given parts scaled to pixels.
inline PixelPoints part_pixels(const ProposalSet& image, std::span<const std::size_t> parts) {
  PixelPoints out{image.meta.image_id, {}};
  const double w = static_cast<double>(image.meta.width);
  const double h = static_cast<double>(image.meta.height);
  for (std::size_t p : parts) {
    if (p >= image.num_parts()) throw DomainError("part index out of range");
    out.points.push_back({image.locations[p].x * w, image.locations[p].y * h});
  }
  return out;
}

inline std::size_t points_inside(const Box& box, std::span<const Vec2> points) {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [&](Vec2 q) { return box.contains(q); }));
}

/// Keeps the boxes that contain at least `min_inside` of the points.
inline BoxSet filter_boxes(const BoxSet& boxes, const PixelPoints& parts,
                           std::size_t min_inside = 3) {
  if (boxes.image_id != parts.image_id) {
    throw StructuralError("boxes for image '" + boxes.image_id + "' filtered with parts of '" +
                          parts.image_id + "'");
  }
  BoxSet kept{boxes.image_id, {}};
  for (const Box& box : boxes.boxes) {
    if (points_inside(box, parts.points) >= min_inside) kept.boxes.push_back(box);
  }
  return kept;
}

}  // namespace nac
