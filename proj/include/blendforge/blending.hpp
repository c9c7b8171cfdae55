#pragma once

#include <array>
#include <variant>
#include <vector>

#include "blendforge/geometry.hpp"
#include "blendforge/image.hpp"

namespace blendforge {

/// out = mask * fg + (1 - mask) * bg, per sample.
ImageBuffer alpha_blend(const ImageBuffer& fg, const ImageBuffer& bg, const Mask& mask);

// Pyramids. Level 0 is full resolution; each level halves (rounding up).

/// Blur (sigma 1) and keep even pixels.
Plane pyr_down(const Plane& plane);
/// Zero-stuff into width x height, blur (sigma 1), gain 4.
Plane pyr_up(const Plane& plane, int width, int height);

/// floor(log2(min(w, h))).
int max_pyramid_levels(int width, int height) noexcept;

std::vector<Plane> gaussian_pyramid(const Plane& plane, int levels);
/// Band-pass levels plus the low-pass residual as the last entry.
std::vector<Plane> laplacian_pyramid(const Plane& plane, int levels);
Plane collapse_laplacian_pyramid(const std::vector<Plane>& pyramid);

/// Multiresolution spline: Laplacian pyramids of fg and bg mixed per level by
/// the Gaussian pyramid of the mask, then collapsed. levels counts all levels,
/// so levels == 1 is plain alpha blending.
ImageBuffer laplacian_blend(const ImageBuffer& fg, const ImageBuffer& bg,
                            const Mask& mask, int levels);

struct PoissonOptions {
  double tolerance = 1e-6;  // relative residual |b - Ax| / |b|
  int max_iters = 0;        // 0 selects 10 * sqrt(unknowns) + 1000
};

struct ChannelSolve {
  int iterations = 0;
  double residual = 0.0;
};

struct PoissonResult {
  ImageBuffer image;
  std::array<ChannelSolve, 3> channels;
  int unknowns = 0;
};

/// Default iteration cap for a system with the given number of unknowns.
int default_poisson_max_iters(int unknowns) noexcept;

/// Gradient-domain compositing: inside the hard mask the 5-point Laplacian of
/// the output matches that of fg, with Dirichlet values from bg on the ring
/// around the region. Each channel is solved by Jacobi-preconditioned
/// conjugate gradient. Throws InvalidRegion when the region is empty or touches
/// the border, ConvergenceError when max_iters is reached.
PoissonResult poisson_blend(const ImageBuffer& fg, const ImageBuffer& bg,
                            const Mask& mask, const PoissonOptions& options = {});

struct AlphaMode {};
struct LaplacianMode {
  int levels = 4;
};
struct PoissonMode {
  double tolerance = 1e-6;
  int max_iters = 0;
};
using BlendMode = std::variant<AlphaMode, LaplacianMode, PoissonMode>;

/// Checks the mode against the raster size.
void validate_blend_mode(const BlendMode& mode, int width, int height);

ImageBuffer blend(const ImageBuffer& fg, const ImageBuffer& bg, const Mask& mask,
                  const BlendMode& mode);

}  // namespace blendforge
