#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "blendforge/geometry.hpp"
#include "blendforge/image.hpp"
#include "blendforge/manifest.hpp"

namespace blendforge {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Sampling ranges of the self-blending transform.
struct SbiParams {
  /// Per-field magnitude bounds; each field is drawn uniformly in [-b, b].
  ColorJitter jitter_bounds{ColorJitter::kMaxBrightness, ColorJitter::kMaxContrast,
                            ColorJitter::kMaxHueDegrees, ColorJitter::kMaxSaturation};
  Range resize_frac{0.95, 1.05};
  Range translate_px{-8.0, 8.0};
  Range deform_amplitude{0.0, 6.0};
  double deform_field_sigma = 8.0;
  Range mask_blur_sigma{3.0, 15.0};
  std::vector<double> blend_ratios{0.25, 0.5, 0.75, 1.0};

  void validate() const;

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults.
  static SbiParams from_json(const nlohmann::json& doc);
};

/// Every sampled value of one self-blended sample. Rendering a draw is
/// deterministic, so this record reproduces the sample exactly.
struct SbiDraw {
  std::uint64_t seed = 0;
  bool jitter_source = true;  // false: the target copy is jittered
  ColorJitter jitter;
  double resize_frac = 1.0;
  double translate_x = 0.0;
  double translate_y = 0.0;
  double deform_amplitude = 0.0;
  double deform_field_sigma = 8.0;
  std::uint64_t deform_seed = 0;
  double mask_blur_sigma = 0.0;  // 0 keeps the mask hard
  double blend_ratio = 1.0;

  nlohmann::json to_json() const;
  static SbiDraw from_json(const nlohmann::json& doc);
  /// Draw that makes source and target identical and the mask hard.
  static SbiDraw identity();
};

struct SbiSample {
  ImageBuffer image;
  Mask mask_used;
  SbiDraw param_record;
  std::string source_id;
};

SbiDraw sample_sbi_draw(const SbiParams& params, std::uint64_t seed);

/// Resize about the image center by frac and translate, bilinear with
/// clamp-to-edge padding.
ImageBuffer warp_scale_translate(const ImageBuffer& img, double frac, double tx,
                                 double ty);

/// Renders a draw: jitter one copy, warp the source, build the deformed,
/// softened, ratio-scaled hull mask and alpha-blend source over target.
SbiSample render_sbi(const ImageBuffer& real, const LandmarkSet& landmarks,
                     const SbiDraw& draw);

SbiSample generate_sbi(const ImageBuffer& real, const LandmarkSet& landmarks,
                       const SbiParams& params, std::uint64_t seed);

struct BatchOptions {
  int threads = 0;             // 0 = hardware concurrency
  bool crop = true;            // face-crop frames before generating
  double crop_margin = 1.3;
  int crop_size = 224;
};

struct SbiBatchSummary {
  Manifest manifest;
  std::size_t generated = 0;
  std::size_t skipped = 0;
};

/// One pseudo-fake per real record. Writes reals/, fakes/, masks/ and
/// params/ under out_dir plus manifest.json; records missing landmarks are
/// skipped and listed in the manifest metadata.
SbiBatchSummary generate_sbi_batch(const Manifest& input, const LandmarkIndex& landmarks,
                                   const SbiParams& params, std::uint64_t base_seed,
                                   const std::filesystem::path& out_dir,
                                   const BatchOptions& options = {});

}  // namespace blendforge
