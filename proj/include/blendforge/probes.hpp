#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "blendforge/geometry.hpp"
#include "blendforge/image.hpp"
#include "blendforge/manifest.hpp"
#include "blendforge/sbi.hpp"

namespace blendforge {

enum class MaskMode { Hard, Soft };

/// Real-on-Real probe configuration: one sub-dataset per brightness delta.
struct ProbeSpec {
  static constexpr double kDefaultSoftSigma = 7.0;

  std::vector<double> deltas = default_deltas();
  MaskMode mask_mode = MaskMode::Hard;
  double soft_sigma = kDefaultSoftSigma;
  std::uint64_t seed = 0;

  /// 0.0, 0.1, ..., 1.0.
  static std::vector<double> default_deltas();
  void validate() const;
};

struct ProbePair {
  ImageBuffer fake;
  ImageBuffer matched_real;
  double delta = 0.0;
  double global_delta = 0.0;  // brightness applied to the whole matched real
  double region_fraction = 0.0;
};

/// Mask used by the probes: hull rasterization, blurred iff soft.
Mask probe_mask(const LandmarkSet& landmarks, int width, int height, MaskMode mode,
                double soft_sigma = ProbeSpec::kDefaultSoftSigma);

/// Whole-image brightness delta whose output mean equals target_mean.
/// Exact: solves the piecewise-linear clamped mean over sorted samples.
double matching_global_delta(const ImageBuffer& img, double target_mean);

/// fake = alpha_blend(brighten(img, delta), img, mask); matched_real is img
/// brightened globally to the same mean as fake.
ProbePair generate_probe_pair(const ImageBuffer& img, const Mask& mask, double delta);
ProbePair generate_probe_pair(const ImageBuffer& img, const LandmarkSet& landmarks,
                              double delta, MaskMode mode,
                              double soft_sigma = ProbeSpec::kDefaultSoftSigma);

/// "delta_<percent>_<hard|soft>".
std::string probe_subset_name(double delta, MaskMode mode);

struct ProbeSubset {
  std::string name;
  double delta = 0.0;
  Manifest manifest;
};

struct ProbeDatasetSummary {
  std::vector<ProbeSubset> subsets;
  std::size_t frames = 0;
  std::size_t skipped = 0;
};

/// Writes one directory per delta (fakes/, reals/, manifest.json) under
/// out_dir plus index.json listing the subsets.
ProbeDatasetSummary generate_probe_dataset(const Manifest& input,
                                           const LandmarkIndex& landmarks,
                                           const ProbeSpec& spec,
                                           const std::filesystem::path& out_dir,
                                           const BatchOptions& options = {});

}  // namespace blendforge
