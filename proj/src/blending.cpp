#include "blendforge/blending.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "blendforge/error.hpp"

namespace blendforge {

namespace {

constexpr double kPyramidSigma = 1.0;

void check_same_shape(const ImageBuffer& fg, const ImageBuffer& bg, const Mask& mask) {
  if (fg.width() != bg.width() || fg.height() != bg.height() ||
      mask.width() != fg.width() || mask.height() != fg.height()) {
    throw Error(ErrorCode::Shape,
                fmt::format("blend inputs differ in size: fg {}x{}, bg {}x{}, mask {}x{}",
                            fg.width(), fg.height(), bg.width(), bg.height(),
                            mask.width(), mask.height()));
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// Sparse 5-point system over the masked pixels.
struct PoissonSystem {
  std::vector<int> pixel;                   // unknown -> pixel index
  std::vector<std::array<int, 4>> neighbor; // unknown -> unknown index or -1
  std::vector<double> diagonal;

  std::vector<double> apply(const std::vector<double>& x) const {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      double acc = diagonal[i] * x[i];
      for (int j : neighbor[i]) {
        if (j >= 0) acc -= x[j];
      }
      y[i] = acc;
    }
    return y;
  }
};

PoissonSystem build_system(const Mask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> index(static_cast<std::size_t>(w) * h, -1);
  PoissonSystem sys;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask(x, y) != 1.0) continue;
      if (x == 0 || y == 0 || x == w - 1 || y == h - 1) {
        throw Error(ErrorCode::InvalidRegion,
                    fmt::format("poisson region touches the image border at ({}, {})",
                                x, y));
      }
      index[static_cast<std::size_t>(y) * w + x] = static_cast<int>(sys.pixel.size());
      sys.pixel.push_back(y * w + x);
    }
  }
  if (sys.pixel.empty()) {
    throw Error(ErrorCode::InvalidRegion, "poisson region is empty");
  }
  sys.neighbor.resize(sys.pixel.size());
  sys.diagonal.assign(sys.pixel.size(), 4.0);
  for (std::size_t i = 0; i < sys.pixel.size(); ++i) {
    const int p = sys.pixel[i];
    sys.neighbor[i] = {index[p - 1], index[p + 1], index[p - w], index[p + w]};
  }
  return sys;
}

ChannelSolve solve_channel(const PoissonSystem& sys, std::span<const double> fg,
                           std::span<const double> bg, int width,
                           const PoissonOptions& options, int max_iters,
                           std::vector<double>& x) {
  const std::size_t n = sys.pixel.size();
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int p = sys.pixel[i];
    const std::array<int, 4> around = {p - 1, p + 1, p - width, p + width};
    double rhs = 0.0;
    for (int k = 0; k < 4; ++k) {
      const int q = around[k];
      rhs += fg[p] - fg[q];
      if (sys.neighbor[i][k] < 0) rhs += bg[q];
    }
    b[i] = rhs;
  }

  const double b_norm = std::sqrt(dot(b, b));
  x.assign(n, 0.0);
  if (b_norm == 0.0) return {0, 0.0};
  for (std::size_t i = 0; i < n; ++i) x[i] = bg[sys.pixel[i]];

  auto true_residual = [&](std::vector<double>& r) {
    const auto ax = sys.apply(x);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
    return std::sqrt(dot(r, r)) / b_norm;
  };

  std::vector<double> r(n), z(n), p(n);
  double rel = true_residual(r);
  int iter = 0;
  // Each cycle runs CG from the current iterate; the recurrence residual can
  // drift, so every cycle ends on the true residual and restarts if needed.
  while (rel > options.tolerance && iter < max_iters) {
    const int cycle_start = iter;
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / sys.diagonal[i];
    p = z;
    double rz = dot(r, z);
    while (iter < max_iters) {
      const auto ap = sys.apply(p);
      const double pap = dot(p, ap);
      if (!(pap > 0.0)) break;
      const double alpha = rz / pap;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
      }
      ++iter;
      if (std::sqrt(dot(r, r)) / b_norm <= options.tolerance) break;
      for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / sys.diagonal[i];
      const double rz_next = dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    rel = true_residual(r);
    if (iter == cycle_start) break;
  }
  if (rel <= options.tolerance) return {iter, rel};
  throw ConvergenceError(
      fmt::format("poisson solve did not converge: residual {:.3e} after {} iterations",
                  rel, iter),
      rel, iter);
}

}  // namespace

ImageBuffer alpha_blend(const ImageBuffer& fg, const ImageBuffer& bg, const Mask& mask) {
  check_same_shape(fg, bg, mask);
  const std::size_t n = fg.pixel_count();
  std::vector<double> out(n * 3);
  for (int c = 0; c < 3; ++c) {
    const auto f = fg.channel(c);
    const auto g = bg.channel(c);
    for (std::size_t i = 0; i < n; ++i) {
      const double m = mask.values()[i];
      out[c * n + i] = m * f[i] + (1.0 - m) * g[i];
    }
  }
  return ImageBuffer(fg.width(), fg.height(), std::move(out));
}

Plane pyr_down(const Plane& plane) {
  const Plane blurred = gaussian_blur(plane, kPyramidSigma);
  const int w = (plane.width() + 1) / 2;
  const int h = (plane.height() + 1) / 2;
  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out(x, y) = blurred(2 * x, 2 * y);
  }
  return out;
}

Plane pyr_up(const Plane& plane, int width, int height) {
  Plane stuffed(width, height);
  for (int y = 0; y < plane.height() && 2 * y < height; ++y) {
    for (int x = 0; x < plane.width() && 2 * x < width; ++x) {
      stuffed(2 * x, 2 * y) = plane(x, y);
    }
  }
  Plane out = gaussian_blur(stuffed, kPyramidSigma);
  for (double& v : out.values()) v *= 4.0;
  return out;
}

int max_pyramid_levels(int width, int height) noexcept {
  int levels = 0;
  for (int side = std::min(width, height); side > 1; side /= 2) ++levels;
  return levels;
}

namespace {

void check_levels(int levels, int width, int height) {
  const int limit = max_pyramid_levels(width, height);
  if (levels < 1 || levels > limit) {
    throw Error(ErrorCode::InvalidParameter,
                fmt::format("pyramid levels must be in [1, {}] for {}x{}, got {}",
                            limit, width, height, levels));
  }
}

}  // namespace

std::vector<Plane> gaussian_pyramid(const Plane& plane, int levels) {
  check_levels(levels, plane.width(), plane.height());
  std::vector<Plane> pyr{plane};
  for (int i = 1; i < levels; ++i) pyr.push_back(pyr_down(pyr.back()));
  return pyr;
}

std::vector<Plane> laplacian_pyramid(const Plane& plane, int levels) {
  std::vector<Plane> pyr = gaussian_pyramid(plane, levels);
  for (int i = 0; i + 1 < levels; ++i) {
    const Plane up = pyr_up(pyr[i + 1], pyr[i].width(), pyr[i].height());
    auto band = pyr[i].values();
    for (std::size_t k = 0; k < band.size(); ++k) band[k] -= up.values()[k];
  }
  return pyr;
}

Plane collapse_laplacian_pyramid(const std::vector<Plane>& pyramid) {
  if (pyramid.empty()) {
    throw Error(ErrorCode::InvalidParameter, "cannot collapse an empty pyramid");
  }
  Plane acc = pyramid.back();
  for (std::size_t i = pyramid.size() - 1; i-- > 0;) {
    Plane up = pyr_up(acc, pyramid[i].width(), pyramid[i].height());
    for (std::size_t k = 0; k < up.size(); ++k) up.values()[k] += pyramid[i].values()[k];
    acc = std::move(up);
  }
  return acc;
}

ImageBuffer laplacian_blend(const ImageBuffer& fg, const ImageBuffer& bg,
                            const Mask& mask, int levels) {
  check_same_shape(fg, bg, mask);
  check_levels(levels, fg.width(), fg.height());
  const std::vector<Plane> weights = gaussian_pyramid(mask.plane(), levels);
  std::array<Plane, 3> channels;
  for (int c = 0; c < 3; ++c) {
    const auto lf = laplacian_pyramid(fg.plane(c), levels);
    std::vector<Plane> mixed = laplacian_pyramid(bg.plane(c), levels);
    for (int l = 0; l < levels; ++l) {
      auto out = mixed[l].values();
      const auto f = lf[l].values();
      const auto m = weights[l].values();
      for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = m[k] * f[k] + (1.0 - m[k]) * out[k];
      }
    }
    channels[c] = collapse_laplacian_pyramid(mixed);
  }
  return ImageBuffer::from_planes(channels);
}

int default_poisson_max_iters(int unknowns) noexcept {
  return static_cast<int>(10.0 * std::sqrt(static_cast<double>(unknowns))) + 1000;
}

PoissonResult poisson_blend(const ImageBuffer& fg, const ImageBuffer& bg,
                            const Mask& mask, const PoissonOptions& options) {
  check_same_shape(fg, bg, mask);
  if (!mask.is_hard()) {
    throw Error(ErrorCode::InvalidParameter, "poisson blending requires a hard mask");
  }
  if (!(options.tolerance > 0.0) || options.max_iters < 0) {
    throw Error(ErrorCode::InvalidParameter,
                "poisson tolerance must be > 0 and max_iters >= 0");
  }
  const PoissonSystem sys = build_system(mask);
  const int unknowns = static_cast<int>(sys.pixel.size());
  const int max_iters =
      options.max_iters > 0 ? options.max_iters : default_poisson_max_iters(unknowns);

  PoissonResult result;
  result.unknowns = unknowns;
  std::vector<double> samples(bg.samples().begin(), bg.samples().end());
  const std::size_t n = bg.pixel_count();
  std::vector<double> x;
  for (int c = 0; c < 3; ++c) {
    result.channels[c] = solve_channel(sys, fg.channel(c), bg.channel(c), fg.width(),
                                       options, max_iters, x);
    for (int i = 0; i < unknowns; ++i) samples[c * n + sys.pixel[i]] = x[i];
  }
  result.image = ImageBuffer(bg.width(), bg.height(), std::move(samples));
  return result;
}

void validate_blend_mode(const BlendMode& mode, int width, int height) {
  if (const auto* lap = std::get_if<LaplacianMode>(&mode)) {
    check_levels(lap->levels, width, height);
  } else if (const auto* poi = std::get_if<PoissonMode>(&mode)) {
    if (!(poi->tolerance > 0.0) || poi->max_iters < 0) {
      throw Error(ErrorCode::InvalidParameter,
                  "poisson tolerance must be > 0 and max_iters >= 0");
    }
  }
}

ImageBuffer blend(const ImageBuffer& fg, const ImageBuffer& bg, const Mask& mask,
                  const BlendMode& mode) {
  validate_blend_mode(mode, fg.width(), fg.height());
  if (const auto* lap = std::get_if<LaplacianMode>(&mode)) {
    return laplacian_blend(fg, bg, mask, lap->levels);
  }
  if (const auto* poi = std::get_if<PoissonMode>(&mode)) {
    return poisson_blend(fg, bg, mask, {poi->tolerance, poi->max_iters}).image;
  }
  return alpha_blend(fg, bg, mask);
}

}  // namespace blendforge
