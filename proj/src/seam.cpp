#include "blendforge/seam.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "blendforge/error.hpp"

namespace blendforge {

Plane seam_energy(const ImageBuffer& img, double residual_sigma) {
  const int w = img.width();
  const int h = img.height();
  Plane energy(w, h);
  for (int c = 0; c < 3; ++c) {
    Plane residual = img.plane(c);
    const Plane low = gaussian_blur(residual, residual_sigma);
    for (std::size_t i = 0; i < residual.size(); ++i) {
      residual.values()[i] -= low.values()[i];
    }
    const double* r = residual.values().data();
    double* e = energy.values().data();
    for (int y = 0; y < h; ++y) {
      const double* up = r + std::max(y - 1, 0) * w;
      const double* row = r + y * w;
      const double* down = r + std::min(y + 1, h - 1) * w;
      for (int x = 0; x < w; ++x) {
        const double gx = 0.5 * (row[std::min(x + 1, w - 1)] - row[std::max(x - 1, 0)]);
        const double gy = 0.5 * (down[x] - up[x]);
        e[y * w + x] += gx * gx + gy * gy;
      }
    }
  }
  for (double& v : energy.values()) v = std::sqrt(v);
  return energy;
}

double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::InvalidInput, "percentile of an empty sample");
  if (!(p >= 0.0 && p <= 100.0)) {
    throw Error(ErrorCode::InvalidParameter, fmt::format("percentile {} outside [0, 100]", p));
  }
  std::vector<double> v(values.begin(), values.end());
  const double rank = p / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  std::nth_element(v.begin(), v.begin() + lo, v.end());
  const double low = v[lo];
  const double high = lo + 1 < v.size() ? *std::min_element(v.begin() + lo + 1, v.end()) : low;
  const double t = rank - static_cast<double>(lo);
  return low + (high - low) * t;
}

SeamScore score_frame(const ImageBuffer& img, const SeamDetectorConfig& config) {
  const Plane energy = seam_energy(img, config.residual_sigma);
  SeamScore score;
  score.high_energy = percentile(energy.values(), config.percentile);
  score.median_energy = percentile(energy.values(), 50.0);
  score.value = score.high_energy / (score.median_energy + config.epsilon);
  return score;
}

std::vector<std::size_t> even_sample_indices(std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx;
  if (n == 0 || k == 0) return idx;
  if (n <= k) {
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
    return idx;
  }
  if (k == 1) return {0};
  for (std::size_t j = 0; j < k; ++j) idx.push_back(j * (n - 1) / (k - 1));
  return idx;
}

double score_video(std::span<const double> frame_scores, std::size_t k) {
  if (frame_scores.empty()) {
    throw Error(ErrorCode::InvalidInput, "score_video needs at least one frame score");
  }
  if (k == 0) throw Error(ErrorCode::InvalidParameter, "frame sample count must be >= 1");
  const auto idx = even_sample_indices(frame_scores.size(), k);
  double acc = 0.0;
  for (std::size_t i : idx) acc += frame_scores[i];
  return acc / static_cast<double>(idx.size());
}

}  // namespace blendforge
