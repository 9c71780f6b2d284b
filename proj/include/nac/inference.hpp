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

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nac/core.hpp"
#include "nac/estimation.hpp"

namespace nac {

struct PartResidual {
  std::size_t part = 0;
  double value = 0.0;

  friend bool operator==(const PartResidual&, const PartResidual&) = default;
};

struct InferenceResult {
  Vec2 root = kImageCenter;
  std::size_t view = 0;
  std::vector<PartResidual> residuals;  // visible selected parts, ascending
  std::size_t iterations = 0;

  double error() const {
    double sum = 0.0;
    for (const auto& r : residuals) sum += r.value;
    return sum;
  }
};

inline constexpr std::size_t kDefaultInferIters = 50;
inline constexpr double kRootTolerance = 1e-12;

/// Estimates root and view of one image with the model held fixed.
/// Visibility is taken from the proposals as given.
inline InferenceResult infer(const ProposalSet& proposals, const ConstellationModel& model,
                             std::size_t max_iters = kDefaultInferIters) {
  if (proposals.locations.size() != proposals.visible.size()) {
    throw StructuralError("image '" + proposals.meta.image_id +
                          "': locations and visibility differ in length");
  }
  if (proposals.num_parts() != model.num_parts) {
    throw StructuralError("image '" + proposals.meta.image_id + "' has " +
                          std::to_string(proposals.num_parts()) + " proposals, model has " +
                          std::to_string(model.num_parts));
  }
  InferenceResult result;
  std::size_t previous_view = std::numeric_limits<std::size_t>::max();
  for (std::size_t it = 0; it < max_iters; ++it) {
    result.iterations = it + 1;
    const Vec2 previous_root = result.root;
    const ViewChoice choice = assign_view(proposals, model, result.root);
    result.view = choice.view;
    result.root = detail::view_root(proposals, model, choice.view, choice.root);
    const bool settled = std::abs(result.root.x - previous_root.x) <= kRootTolerance &&
                         std::abs(result.root.y - previous_root.y) <= kRootTolerance;
    if (settled && result.view == previous_view) break;
    previous_view = result.view;
  }
  for (std::size_t p = 0; p < model.num_parts; ++p) {
    if (!is_active(proposals, model, result.view, p)) continue;
    result.residuals.push_back(
        {p, squared_norm(proposals.locations[p] - result.root - model.shift(result.view, p))});
  }
  return result;
}

}  // namespace nac
