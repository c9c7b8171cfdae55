#include "blendforge/image.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "blendforge/error.hpp"

namespace blendforge {

namespace {

double clamp01(double v) noexcept {
  if (!(v > 0.0)) return 0.0;  // also maps NaN to 0
  return v < 1.0 ? v : 1.0;
}

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidParameter,
                fmt::format("raster dimensions must be positive, got {}x{}",
                            width, height));
  }
}

double lerp(double a, double b, double t) noexcept { return a + (b - a) * t; }

// One separable pass over a row-major buffer. horizontal selects the axis.
void blur_pass(std::span<const double> in, std::span<double> out, int width,
               int height, const std::vector<double>& kernel, bool horizontal) {
  const int radius = static_cast<int>(kernel.size() / 2);
  const auto w = static_cast<std::size_t>(width);
  if (horizontal) {
    std::vector<double> row(w + 2 * radius);
    for (int y = 0; y < height; ++y) {
      const double* src = in.data() + y * w;
      for (int i = 0; i < width + 2 * radius; ++i) {
        row[i] = src[std::clamp(i - radius, 0, width - 1)];
      }
      double* dst = out.data() + y * w;
      for (int x = 0; x < width; ++x) {
        double acc = 0.0;
        for (int j = 0; j <= 2 * radius; ++j) acc += kernel[j] * row[x + j];
        dst[x] = acc;
      }
    }
    return;
  }
  // Row-wise accumulation; same per-pixel summation order as the horizontal pass.
  for (int y = 0; y < height; ++y) {
    double* dst = out.data() + y * w;
    std::fill(dst, dst + w, 0.0);
    for (int j = -radius; j <= radius; ++j) {
      const double k = kernel[j + radius];
      const double* src = in.data() + std::clamp(y + j, 0, height - 1) * w;
      for (std::size_t x = 0; x < w; ++x) dst[x] += k * src[x];
    }
  }
}

}  // namespace

Plane::Plane(int width, int height, double fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  values_.assign(static_cast<std::size_t>(width) * height, fill);
}

Plane::Plane(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width, height);
  if (values_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::Shape, "plane value count does not match dimensions");
  }
}

double Plane::at_clamped(int x, int y) const noexcept {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return (*this)(x, y);
}

ImageBuffer::ImageBuffer(int width, int height, double fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  samples_.assign(pixel_count() * kChannels, clamp01(fill));
}

ImageBuffer::ImageBuffer(int width, int height, std::vector<double> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  check_dims(width, height);
  if (samples_.size() != pixel_count() * kChannels) {
    throw Error(ErrorCode::Shape,
                fmt::format("expected {} samples for {}x{}x3, got {}",
                            pixel_count() * kChannels, width, height,
                            samples_.size()));
  }
  for (double& v : samples_) v = clamp01(v);
}

ImageBuffer ImageBuffer::from_planes(const std::array<Plane, 3>& planes) {
  const int w = planes[0].width();
  const int h = planes[0].height();
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(w) * h * kChannels);
  for (const Plane& p : planes) {
    if (p.width() != w || p.height() != h) {
      throw Error(ErrorCode::Shape, "channel planes differ in size");
    }
    samples.insert(samples.end(), p.values().begin(), p.values().end());
  }
  return ImageBuffer(w, h, std::move(samples));
}

ImageBuffer ImageBuffer::from_interleaved(int width, int height,
                                          std::span<const double> hwc) {
  check_dims(width, height);
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (hwc.size() != n * kChannels) {
    throw Error(ErrorCode::Shape, "interleaved buffer size does not match dimensions");
  }
  std::vector<double> samples(n * kChannels);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < kChannels; ++c) {
      samples[c * n + i] = hwc[i * kChannels + c];
    }
  }
  return ImageBuffer(width, height, std::move(samples));
}

Plane ImageBuffer::plane(int c) const {
  auto ch = channel(c);
  return Plane(width_, height_, std::vector<double>(ch.begin(), ch.end()));
}

std::vector<double> ImageBuffer::to_interleaved() const {
  const std::size_t n = pixel_count();
  std::vector<double> hwc(n * kChannels);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < kChannels; ++c) {
      hwc[i * kChannels + c] = samples_[c * n + i];
    }
  }
  return hwc;
}

double ImageBuffer::mean() const noexcept {
  double acc = 0.0;
  for (double v : samples_) acc += v;
  return samples_.empty() ? 0.0 : acc / static_cast<double>(samples_.size());
}

Hsv rgb_to_hsv(Rgb rgb) noexcept {
  const double mx = std::max({rgb.r, rgb.g, rgb.b});
  const double mn = std::min({rgb.r, rgb.g, rgb.b});
  const double chroma = mx - mn;
  Hsv out;
  out.v = mx;
  out.s = mx > 0.0 ? chroma / mx : 0.0;
  if (chroma <= 0.0) {
    out.h = 0.0;
  } else if (mx == rgb.r) {
    out.h = 60.0 * std::fmod((rgb.g - rgb.b) / chroma + 6.0, 6.0);
  } else if (mx == rgb.g) {
    out.h = 60.0 * ((rgb.b - rgb.r) / chroma + 2.0);
  } else {
    out.h = 60.0 * ((rgb.r - rgb.g) / chroma + 4.0);
  }
  if (out.h >= 360.0) out.h -= 360.0;
  return out;
}

Rgb hsv_to_rgb(Hsv hsv) noexcept {
  double h = std::fmod(hsv.h, 360.0);
  if (h < 0.0) h += 360.0;
  const double c = hsv.v * hsv.s;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  const double m = hsv.v - c;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  return {r + m, g + m, b + m};
}

HsvImage rgb_to_hsv(const ImageBuffer& img) {
  HsvImage out{img.width(), img.height(),
               {Plane(img.width(), img.height()), Plane(img.width(), img.height()),
                Plane(img.width(), img.height())}};
  const std::size_t n = img.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    Hsv hsv = rgb_to_hsv(Rgb{img.channel(0)[i], img.channel(1)[i], img.channel(2)[i]});
    out.planes[0].values()[i] = hsv.h;
    out.planes[1].values()[i] = hsv.s;
    out.planes[2].values()[i] = hsv.v;
  }
  return out;
}

ImageBuffer hsv_to_rgb(const HsvImage& hsv) {
  const std::size_t n = static_cast<std::size_t>(hsv.width) * hsv.height;
  std::vector<double> samples(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    Rgb rgb = hsv_to_rgb(Hsv{hsv.planes[0].values()[i], hsv.planes[1].values()[i],
                             hsv.planes[2].values()[i]});
    samples[i] = rgb.r;
    samples[n + i] = rgb.g;
    samples[2 * n + i] = rgb.b;
  }
  return ImageBuffer(hsv.width, hsv.height, std::move(samples));
}

void ColorJitter::validate() const {
  auto check = [](double v, double bound, const char* name) {
    if (!std::isfinite(v) || std::fabs(v) > bound) {
      throw Error(ErrorCode::InvalidParameter,
                  fmt::format("color jitter {}={} outside [-{}, {}]", name, v,
                              bound, bound));
    }
  };
  check(brightness_delta, kMaxBrightness, "brightness_delta");
  check(contrast_delta, kMaxContrast, "contrast_delta");
  check(hue_shift, kMaxHueDegrees, "hue_shift");
  check(saturation_delta, kMaxSaturation, "saturation_delta");
}

ImageBuffer adjust_brightness(const ImageBuffer& img, double delta) {
  if (!std::isfinite(delta) || delta < -1.0) {
    throw Error(ErrorCode::InvalidParameter,
                fmt::format("brightness delta must be >= -1, got {}", delta));
  }
  if (delta == 0.0) return img;
  const double gain = 1.0 + delta;
  std::vector<double> out(img.samples().begin(), img.samples().end());
  for (double& v : out) v *= gain;
  return ImageBuffer(img.width(), img.height(), std::move(out));
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::InvalidParameter,
                fmt::format("gaussian sigma must be positive, got {}", sigma));
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    total += k[i + radius];
  }
  for (double& v : k) v /= total;
  return k;
}

Plane gaussian_blur(const Plane& plane, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  Plane tmp(plane.width(), plane.height());
  Plane out(plane.width(), plane.height());
  blur_pass(plane.values(), tmp.values(), plane.width(), plane.height(), kernel, true);
  blur_pass(tmp.values(), out.values(), plane.width(), plane.height(), kernel, false);
  return out;
}

ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma) {
  return ImageBuffer::from_planes({gaussian_blur(img.plane(0), sigma),
                                   gaussian_blur(img.plane(1), sigma),
                                   gaussian_blur(img.plane(2), sigma)});
}

double sample_bilinear(const Plane& plane, double x, double y) noexcept {
  x = std::clamp(x, 0.0, static_cast<double>(plane.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(plane.height() - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, plane.width() - 1);
  const int y1 = std::min(y0 + 1, plane.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = lerp(plane(x0, y0), plane(x1, y0), fx);
  const double bottom = lerp(plane(x0, y1), plane(x1, y1), fx);
  return lerp(top, bottom, fy);
}

Plane resize_bilinear(const Plane& plane, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) {
    throw Error(ErrorCode::InvalidParameter,
                fmt::format("resize target must be positive, got {}x{}", out_w, out_h));
  }
  Plane out(out_w, out_h);
  const double sx = static_cast<double>(plane.width()) / out_w;
  const double sy = static_cast<double>(plane.height()) / out_h;
  for (int y = 0; y < out_h; ++y) {
    const double src_y = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < out_w; ++x) {
      out(x, y) = sample_bilinear(plane, (x + 0.5) * sx - 0.5, src_y);
    }
  }
  return out;
}

ImageBuffer resize_bilinear(const ImageBuffer& img, int out_w, int out_h) {
  return ImageBuffer::from_planes({resize_bilinear(img.plane(0), out_w, out_h),
                                   resize_bilinear(img.plane(1), out_w, out_h),
                                   resize_bilinear(img.plane(2), out_w, out_h)});
}

ImageBuffer apply_color_jitter(const ImageBuffer& img, const ColorJitter& jitter) {
  jitter.validate();
  return apply_color_transform(img, jitter);
}

ImageBuffer apply_color_transform(const ImageBuffer& img, const ColorJitter& jitter) {
  if (jitter.brightness_delta < -1.0 || jitter.contrast_delta < -1.0 ||
      jitter.saturation_delta < -1.0) {
    throw Error(ErrorCode::InvalidParameter, "color transform deltas must be >= -1");
  }
  ImageBuffer out = adjust_brightness(img, jitter.brightness_delta);

  if (jitter.contrast_delta != 0.0) {
    const std::size_t n = out.pixel_count();
    double luma = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      luma += 0.299 * out.channel(0)[i] + 0.587 * out.channel(1)[i] +
              0.114 * out.channel(2)[i];
    }
    luma /= static_cast<double>(n);
    const double gain = 1.0 + jitter.contrast_delta;
    std::vector<double> samples(out.samples().begin(), out.samples().end());
    for (double& v : samples) v = (v - luma) * gain + luma;
    out = ImageBuffer(out.width(), out.height(), std::move(samples));
  }

  if (jitter.hue_shift != 0.0 || jitter.saturation_delta != 0.0) {
    HsvImage hsv = rgb_to_hsv(out);
    for (double& h : hsv.planes[0].values()) {
      h = std::fmod(h + jitter.hue_shift + 360.0, 360.0);
    }
    const double gain = 1.0 + jitter.saturation_delta;
    for (double& s : hsv.planes[1].values()) s = clamp01(s * gain);
    out = hsv_to_rgb(hsv);
  }
  return out;
}

}  // namespace blendforge
