// Copyright 2026 The concept_tab Authors
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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "concept_tab/feature_store.hpp"

namespace concept_tab {

enum class Semantic { kStrokeThickness, kDiscRadius, kBackgroundBrightness, kTiltAngle };

inline constexpr Semantic kAllSemantics[] = {
    Semantic::kStrokeThickness, Semantic::kDiscRadius, Semantic::kBackgroundBrightness,
    Semantic::kTiltAngle};

std::string to_string(Semantic s);
Semantic semantic_from_string(const std::string& s);

struct ConceptDim {
  std::size_t dim = 0;
  Semantic semantic = Semantic::kStrokeThickness;
  double gain = 1.0;  // semantic strength is driven by gain * latent[dim]
};

struct LabelTerm {
  std::size_t dim = 0;
  double coef = 0.0;
};

// label = 1 iff sum_j coef_j * latent[dim_j] + bias + noise_std * N(0,1) > 0
struct LabelRule {
  std::vector<LabelTerm> terms;
  double bias = 0.0;
  double noise_std = 0.0;
};

// latent[target] = latent[source] + noise * N(0,1)
struct RedundantPair {
  std::size_t source = 0;
  std::size_t target = 0;
  double noise = 0.05;
};

// A generative world with planted ground truth: a few latent dims drive
// measurable image semantics, a subset of those drives the label, and the
// rest perturb background texture only.
struct SyntheticSpec {
  std::size_t dims = 64;
  std::vector<ConceptDim> concepts;
  LabelRule label_rule;
  std::vector<RedundantPair> redundant_pairs;
  double noise_std = 1.0;  // scale of the non-concept dims
  std::uint64_t seed = 0;

  void validate() const;

  const ConceptDim* concept_for_dim(std::size_t dim) const;
  const ConceptDim* concept_for_semantic(Semantic s) const;
  // Dims referenced by the label rule.
  std::vector<std::size_t> class_relevant_dims() const;
  // Redundant targets whose source is `dim`.
  std::vector<std::size_t> correlates_of(std::size_t dim) const;
};

// Planted world: 3 class-relevant concept dims, one interpretable but
// class-irrelevant concept dim, one redundant correlate of a class-relevant
// dim, the remaining dims unit noise.
SyntheticSpec default_spec();
// default_spec() without the redundant correlate, so exactly the label-rule
// dims carry class information.
SyntheticSpec concept_recovery_spec();

// Applies the label rule to one latent (noise-free part only).
double label_score(const SyntheticSpec& spec, std::span<const double> latent);

// n latent rows with labels. Retries with derived seeds (up to 10 attempts)
// until both classes are present.
FeatureMatrix sample_dataset(const SyntheticSpec& spec, std::size_t n, std::uint64_t seed);

inline constexpr std::size_t kImageSize = 64;

struct RenderedImage {
  std::size_t width = kImageSize;
  std::size_t height = kImageSize;
  std::vector<double> pixels;  // row-major, values in [0, 1]

  double at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }

  friend bool operator==(const RenderedImage&, const RenderedImage&) = default;
};

// Semantic transfer functions (input: gain * latent value, clamped to [-4, 4]).
double stroke_width_px(double v);
double disc_radius_px(double v);
double border_brightness(double v);
double tilt_degrees(double v);

// Deterministic 64x64 rendering of a latent.
RenderedImage render(const SyntheticSpec& spec, std::span<const double> latent);

// Pixel-analysis probe for one semantic: bar width (px), disc radius (px),
// border band mean intensity, or bar orientation (degrees). Returns 0 when
// the structure is absent.
double measure_semantic(const RenderedImage& image, Semantic semantic);

// Binary PGM (P5, maxval 255).
std::string encode_pgm(const RenderedImage& image);
RenderedImage decode_pgm(const std::string& bytes);
void write_pgm(const RenderedImage& image, const std::filesystem::path& path);
RenderedImage read_pgm(const std::filesystem::path& path);

nlohmann::json to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

}  // namespace concept_tab
