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

// Generates keypoints from a random three-view model, fits a model to
// them and prints the parts each view selected next to the true ones.

#include <cstdio>

#include "nac/nac.hpp"

int main() {
  nac::SynthSpec spec;
  spec.images = 150;
  spec.parts = 20;
  spec.views = 3;
  spec.parts_per_view = 6;
  spec.noise_sigma = 0.02;
  spec.visibility_rate = 0.9;
  spec.rng_seed = 7;
  const nac::SynthResult synth = nac::generate(spec);

  nac::FitConfig cfg;
  cfg.views = spec.views;
  cfg.parts_per_view = spec.parts_per_view;
  cfg.restarts = 20;
  const nac::FitReport report = nac::fit(synth.data, cfg);

  std::printf("objective %.6g (truth %.6g), best restart %zu\n", report.objective,
              nac::objective(synth.data, synth.truth, synth.truth_latent), report.best_restart);
  const auto print_view = [](const char* label, const nac::ConstellationModel& m, std::size_t v) {
    std::printf("  %s view %zu:", label, v);
    for (std::size_t p : m.parts_of(v)) std::printf(" %zu", p);
    std::printf("\n");
  };
  for (std::size_t v = 0; v < spec.views; ++v) print_view("fitted", report.model, v);
  for (std::size_t v = 0; v < spec.views; ++v) print_view("true  ", synth.truth, v);

  const auto counts = nac::count_part_usage(synth.data, report.model, report.latent);
  std::printf("most used parts:");
  for (std::size_t p : nac::top_k_parts(counts, 5)) std::printf(" %zu (%zu)", p, counts[p]);
  std::printf("\n");
  return 0;
}
