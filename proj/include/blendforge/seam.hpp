#pragma once

#include <span>
#include <vector>

#include "blendforge/image.hpp"

namespace blendforge {

/// Training-free blending-boundary scorer. High-pass residual, gradient
/// energy, then a high percentile normalized by the median energy.
struct SeamDetectorConfig {
  double residual_sigma = 2.0;
  double percentile = 99.5;
  double epsilon = 1e-6;
};

struct SeamScore {
  double value = 0.0;        // percentile / (median + epsilon)
  double high_energy = 0.0;  // the percentile of the energy map
  double median_energy = 0.0;
};

/// Per-pixel L2 norm over channels of the central-difference gradient of
/// img - blur(img). Borders use clamp-to-edge.
Plane seam_energy(const ImageBuffer& img, double residual_sigma = 2.0);

/// Linear-interpolated percentile (p in [0, 100]) of a sample.
double percentile(std::span<const double> values, double p);

SeamScore score_frame(const ImageBuffer& img, const SeamDetectorConfig& config = {});

/// Indices floor(j (N-1) / (k-1)) for j in [0, k); all indices when N <= k.
std::vector<std::size_t> even_sample_indices(std::size_t n, std::size_t k);

/// Mean of the evenly sampled frame scores. Throws InvalidInput when empty.
double score_video(std::span<const double> frame_scores, std::size_t k = 32);

}  // namespace blendforge
