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

#include "concept_tab/synthetic_world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "concept_tab/errors.hpp"

namespace concept_tab {

std::string to_string(Semantic s) {
  switch (s) {
    case Semantic::kStrokeThickness: return "stroke_thickness";
    case Semantic::kDiscRadius: return "disc_radius";
    case Semantic::kBackgroundBrightness: return "background_brightness";
    case Semantic::kTiltAngle: return "tilt_angle";
  }
  return "unknown";
}

Semantic semantic_from_string(const std::string& s) {
  for (const Semantic sem : kAllSemantics) {
    if (to_string(sem) == s) return sem;
  }
  throw InvalidArgument("unknown semantic '" + s + "'");
}

void SyntheticSpec::validate() const {
  if (dims < 1) throw InvalidArgument("synthetic spec needs dims >= 1");
  std::set<std::size_t> concept_dims;
  std::set<Semantic> semantics;
  for (const auto& c : concepts) {
    if (c.dim >= dims) throw InvalidArgument("concept dim out of range");
    if (!concept_dims.insert(c.dim).second) throw InvalidArgument("duplicate concept dim");
    if (!semantics.insert(c.semantic).second) {
      throw InvalidArgument("semantic " + to_string(c.semantic) + " assigned twice");
    }
    if (!std::isfinite(c.gain)) throw InvalidArgument("concept gain must be finite");
  }
  for (const auto& t : label_rule.terms) {
    if (!concept_dims.contains(t.dim)) {
      throw InvalidArgument("label rule references non-concept dim " + std::to_string(t.dim));
    }
  }
  if (!(label_rule.noise_std >= 0.0)) throw InvalidArgument("label noise must be >= 0");
  std::set<std::size_t> targets;
  for (const auto& p : redundant_pairs) {
    if (p.source >= dims || p.target >= dims || p.source == p.target) {
      throw InvalidArgument("invalid redundant pair");
    }
    if (concept_dims.contains(p.target)) {
      throw InvalidArgument("redundant target must not be a concept dim");
    }
    if (!targets.insert(p.target).second) throw InvalidArgument("redundant target used twice");
    if (!(p.noise >= 0.0)) throw InvalidArgument("redundant noise must be >= 0");
  }
  for (const auto& p : redundant_pairs) {
    if (targets.contains(p.source)) throw InvalidArgument("redundant pairs must not chain");
  }
  if (!(noise_std >= 0.0)) throw InvalidArgument("noise_std must be >= 0");
}

const ConceptDim* SyntheticSpec::concept_for_dim(std::size_t dim) const {
  for (const auto& c : concepts) {
    if (c.dim == dim) return &c;
  }
  return nullptr;
}

const ConceptDim* SyntheticSpec::concept_for_semantic(Semantic s) const {
  for (const auto& c : concepts) {
    if (c.semantic == s) return &c;
  }
  return nullptr;
}

std::vector<std::size_t> SyntheticSpec::class_relevant_dims() const {
  std::vector<std::size_t> out;
  for (const auto& t : label_rule.terms) out.push_back(t.dim);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> SyntheticSpec::correlates_of(std::size_t dim) const {
  std::vector<std::size_t> out;
  for (const auto& p : redundant_pairs) {
    if (p.source == dim) out.push_back(p.target);
  }
  return out;
}

SyntheticSpec default_spec() {
  SyntheticSpec spec = concept_recovery_spec();
  spec.redundant_pairs = {{7, 41, 0.05}};
  return spec;
}

SyntheticSpec concept_recovery_spec() {
  SyntheticSpec spec;
  spec.dims = 64;
  spec.concepts = {
      {3, Semantic::kStrokeThickness, 1.0},
      {7, Semantic::kDiscRadius, 1.0},
      {12, Semantic::kBackgroundBrightness, 1.0},
      {20, Semantic::kTiltAngle, 1.0},
  };
  spec.label_rule.terms = {{3, 3.0}, {12, 1.5}, {7, 1.0}};
  spec.label_rule.bias = 0.0;
  spec.label_rule.noise_std = 0.0;
  spec.noise_std = 1.0;
  spec.seed = 1;
  return spec;
}

double label_score(const SyntheticSpec& spec, std::span<const double> latent) {
  double s = spec.label_rule.bias;
  for (const auto& t : spec.label_rule.terms) s += t.coef * latent[t.dim];
  return s;
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

FeatureMatrix sample_dataset(const SyntheticSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (n < 2) throw InvalidArgument("sample_dataset needs n >= 2");
  const std::size_t d = spec.dims;
  std::vector<bool> is_concept(d, false);
  for (const auto& c : spec.concepts) is_concept[c.dim] = true;

  constexpr int kAttempts = 10;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    std::mt19937_64 rng(attempt == 0 ? seed : mix64(seed + static_cast<std::uint64_t>(attempt)));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> values(n * d);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      double* row = values.data() + i * d;
      for (std::size_t k = 0; k < d; ++k) {
        const double z = normal(rng);
        row[k] = is_concept[k] ? z : spec.noise_std * z;
      }
      for (const auto& p : spec.redundant_pairs) row[p.target] = row[p.source] + p.noise * normal(rng);
      double score = label_score(spec, {row, d});
      if (spec.label_rule.noise_std > 0.0) score += spec.label_rule.noise_std * normal(rng);
      labels[i] = score > 0.0 ? 1 : 0;
    }
    const auto pos = std::count(labels.begin(), labels.end(), 1);
    if (pos > 0 && static_cast<std::size_t>(pos) < n) {
      return FeatureMatrix(n, d, std::move(values), std::move(labels));
    }
  }
  throw InvalidArgument("label rule is degenerate: one class after 10 sampling attempts");
}

// ---------------------------------------------------------------------------
// Rendering
//
// Layout (pixel units, origin top-left, center at (32, 32)):
//   border band  : 4 px frame, intensity border_brightness(v)
//   interior     : 0.35, carrying a +-0.03 checkerboard texture driven by
//                  the non-concept dims on pixels no shape touches
//   disc         : radius disc_radius_px(v), intensity 0.1
//   bar          : width stroke_width_px(v), length 40, tilted by
//                  tilt_degrees(v) from vertical, intensity 0.9, drawn on top
// Shapes are anti-aliased by 8x8 supersampling and never reach the band.

namespace {

constexpr double kCenter = 32.0;
constexpr std::size_t kBand = 4;
constexpr double kInterior = 0.35;
constexpr double kDiscLevel = 0.1;
constexpr double kBarLevel = 0.9;
constexpr double kBarHalfLength = 20.0;
constexpr double kTextureAmplitude = 0.03;
constexpr int kSuper = 8;
constexpr std::size_t kTile = 8;

double clamp_v(double v) { return std::clamp(v, -4.0, 4.0); }

bool in_band(std::size_t x, std::size_t y) {
  return x < kBand || y < kBand || x >= kImageSize - kBand || y >= kImageSize - kBand;
}

double semantic_input(const SyntheticSpec& spec, std::span<const double> latent, Semantic s) {
  const ConceptDim* c = spec.concept_for_semantic(s);
  return c == nullptr ? 0.0 : clamp_v(c->gain * latent[c->dim]);
}

}  // namespace

double stroke_width_px(double v) { return 6.0 + clamp_v(v); }
double disc_radius_px(double v) { return 18.0 + 2.25 * clamp_v(v); }
double border_brightness(double v) { return 0.5 + 0.1 * clamp_v(v); }
double tilt_degrees(double v) { return 7.5 * clamp_v(v); }

RenderedImage render(const SyntheticSpec& spec, std::span<const double> latent) {
  if (latent.size() != spec.dims) throw InvalidArgument("latent dimension mismatch");
  for (const double v : latent) {
    if (!std::isfinite(v)) throw InvalidArgument("latent contains a non-finite value");
  }

  const double width = stroke_width_px(semantic_input(spec, latent, Semantic::kStrokeThickness));
  const double radius = disc_radius_px(semantic_input(spec, latent, Semantic::kDiscRadius));
  const double band = border_brightness(semantic_input(spec, latent, Semantic::kBackgroundBrightness));
  const double theta =
      tilt_degrees(semantic_input(spec, latent, Semantic::kTiltAngle)) * std::numbers::pi / 180.0;
  const double ux = std::sin(theta);
  const double uy = std::cos(theta);

  // Per-tile texture amplitude from the non-concept dims.
  constexpr std::size_t kTiles = kImageSize / kTile;
  std::vector<double> tile_amp(kTiles * kTiles, 0.0);
  std::size_t noise_dims = 0;
  for (std::size_t k = 0; k < spec.dims; ++k) noise_dims += spec.concept_for_dim(k) ? 0 : 1;
  if (noise_dims > 0) {
    const double norm = 1.0 / std::sqrt(static_cast<double>(noise_dims));
    for (std::size_t t = 0; t < tile_amp.size(); ++t) {
      double s = 0.0;
      for (std::size_t k = 0; k < spec.dims; ++k) {
        if (spec.concept_for_dim(k)) continue;
        const bool plus = (mix64((k << 16) ^ t ^ 0x5eedu) & 1u) != 0;
        s += plus ? latent[k] : -latent[k];
      }
      tile_amp[t] = kTextureAmplitude * std::tanh(s * norm);
    }
  }

  RenderedImage img;
  img.pixels.assign(kImageSize * kImageSize, 0.0);
  const double r2 = radius * radius;
  const double half_w = width / 2.0;
  for (std::size_t y = 0; y < kImageSize; ++y) {
    for (std::size_t x = 0; x < kImageSize; ++x) {
      if (in_band(x, y)) {
        img.pixels[y * kImageSize + x] = band;
        continue;
      }
      double acc = 0.0;
      bool touched = false;
      for (int sy = 0; sy < kSuper; ++sy) {
        for (int sx = 0; sx < kSuper; ++sx) {
          const double px = static_cast<double>(x) + (sx + 0.5) / kSuper - kCenter;
          const double py = static_cast<double>(y) + (sy + 0.5) / kSuper - kCenter;
          const double along = px * ux + py * uy;
          const double perp = px * uy - py * ux;
          if (std::fabs(along) <= kBarHalfLength && std::fabs(perp) <= half_w) {
            acc += kBarLevel;
            touched = true;
          } else if (px * px + py * py <= r2) {
            acc += kDiscLevel;
            touched = true;
          } else {
            acc += kInterior;
          }
        }
      }
      double v = acc / (kSuper * kSuper);
      if (!touched) {
        const std::size_t tile = (y / kTile) * kTiles + (x / kTile);
        v += ((x + y) % 2 == 0 ? 1.0 : -1.0) * tile_amp[tile];
      }
      img.pixels[y * kImageSize + x] = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

// ---------------------------------------------------------------------------
// Probes. These read pixels only; they rely on the documented palette and
// layout, not on the renderer's code paths.

namespace {

constexpr std::size_t kProbeRow = 32;

// Orientation of the bright bar from a least-squares fit of per-row
// centroids, in degrees from vertical.
double probe_tilt(const RenderedImage& img) {
  std::vector<double> ys, cs;
  for (std::size_t y = 18; y <= 46; ++y) {
    double mass = 0.0, moment = 0.0;
    for (std::size_t x = kBand; x < img.width - kBand; ++x) {
      const double w = std::clamp((img.at(x, y) - 0.4) / 0.5, 0.0, 1.0);
      mass += w;
      moment += w * (static_cast<double>(x) + 0.5);
    }
    if (mass > 0.5) {
      ys.push_back(static_cast<double>(y) + 0.5);
      cs.push_back(moment / mass);
    }
  }
  if (ys.size() < 2) return 0.0;
  const double n = static_cast<double>(ys.size());
  double my = 0.0, mc = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    my += ys[i];
    mc += cs[i];
  }
  my /= n;
  mc /= n;
  double sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    sxy += (ys[i] - my) * (cs[i] - mc);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  return std::atan(sxy / syy) * 180.0 / std::numbers::pi;
}

// Horizontal chord of the bar through the center row, over the disc
// background, projected perpendicular to the bar axis.
double probe_width(const RenderedImage& img) {
  double chord = 0.0;
  for (std::size_t x = 24; x < 40; ++x) {
    chord += std::clamp((img.at(x, kProbeRow) - kDiscLevel) / (kBarLevel - kDiscLevel), 0.0, 1.0);
  }
  if (chord == 0.0) return 0.0;
  return chord * std::cos(probe_tilt(img) * std::numbers::pi / 180.0);
}

// Disc extent along the center row to the right of the bar. Pixels within
// the texture amplitude of the interior level count as background.
double probe_radius(const RenderedImage& img) {
  auto coverage = [&](std::size_t x) {
    const double v = img.at(x, kProbeRow);
    if (v < kDiscLevel - 0.005 || v > kInterior) return 0.0;
    if (std::fabs(v - kInterior) <= kTextureAmplitude + 1e-3) return 0.0;
    return std::clamp((kInterior - v) / (kInterior - kDiscLevel), 0.0, 1.0);
  };
  constexpr std::size_t kStart = 40;
  if (coverage(kStart) < 0.999) return 0.0;
  double r = static_cast<double>(kStart) - kCenter;
  for (std::size_t x = kStart; x < img.width - kBand; ++x) r += coverage(x);
  return r;
}

double probe_border(const RenderedImage& img) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      if (in_band(x, y)) {
        sum += img.at(x, y);
        ++count;
      }
    }
  }
  return sum / static_cast<double>(count);
}

}  // namespace

double measure_semantic(const RenderedImage& image, Semantic semantic) {
  if (image.width != kImageSize || image.height != kImageSize ||
      image.pixels.size() != kImageSize * kImageSize) {
    throw InvalidArgument("probes expect a 64x64 image");
  }
  switch (semantic) {
    case Semantic::kStrokeThickness: return probe_width(image);
    case Semantic::kDiscRadius: return probe_radius(image);
    case Semantic::kBackgroundBrightness: return probe_border(image);
    case Semantic::kTiltAngle: return probe_tilt(image);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// PGM

std::string encode_pgm(const RenderedImage& image) {
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                    "\n255\n";
  out.reserve(out.size() + image.pixels.size());
  for (const double v : image.pixels) {
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
  }
  return out;
}

RenderedImage decode_pgm(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || w == 0 || h == 0 || maxval != 255) throw InvalidArgument("not an 8-bit P5 PGM");
  in.get();
  RenderedImage img;
  img.width = w;
  img.height = h;
  img.pixels.resize(w * h);
  for (auto& p : img.pixels) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw InvalidArgument("truncated PGM");
    p = static_cast<double>(c) / 255.0;
  }
  return img;
}

void write_pgm(const RenderedImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const auto bytes = encode_pgm(image);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

RenderedImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_pgm(ss.str());
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const SyntheticSpec& spec) {
  nlohmann::json concepts = nlohmann::json::array();
  for (const auto& c : spec.concepts) {
    concepts.push_back({{"dim", c.dim}, {"semantic", to_string(c.semantic)}, {"gain", c.gain}});
  }
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : spec.label_rule.terms) terms.push_back({{"dim", t.dim}, {"coef", t.coef}});
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : spec.redundant_pairs) {
    pairs.push_back({{"source", p.source}, {"target", p.target}, {"noise", p.noise}});
  }
  return {{"format", "concept_tab.synthetic_spec"},
          {"version", 1},
          {"dims", spec.dims},
          {"concepts", concepts},
          {"label_rule",
           {{"terms", terms}, {"bias", spec.label_rule.bias}, {"noise_std", spec.label_rule.noise_std}}},
          {"redundant_pairs", pairs},
          {"noise_std", spec.noise_std},
          {"seed", spec.seed}};
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  SyntheticSpec spec;
  spec.dims = j.at("dims").get<std::size_t>();
  for (const auto& c : j.at("concepts")) {
    spec.concepts.push_back({c.at("dim").get<std::size_t>(),
                             semantic_from_string(c.at("semantic").get<std::string>()),
                             c.value("gain", 1.0)});
  }
  const auto& rule = j.at("label_rule");
  for (const auto& t : rule.at("terms")) {
    spec.label_rule.terms.push_back({t.at("dim").get<std::size_t>(), t.at("coef").get<double>()});
  }
  spec.label_rule.bias = rule.value("bias", 0.0);
  spec.label_rule.noise_std = rule.value("noise_std", 0.0);
  for (const auto& p : j.value("redundant_pairs", nlohmann::json::array())) {
    spec.redundant_pairs.push_back({p.at("source").get<std::size_t>(),
                                    p.at("target").get<std::size_t>(), p.value("noise", 0.05)});
  }
  spec.noise_std = j.value("noise_std", 1.0);
  spec.seed = j.value("seed", std::uint64_t{0});
  spec.validate();
  return spec;
}

}  // namespace concept_tab
