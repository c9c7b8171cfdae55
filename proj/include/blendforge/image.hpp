#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace blendforge {

/// Unclamped single-channel raster, row-major. Working storage for filters,
/// pyramids and displacement fields; values may leave [0, 1].
class Plane {
 public:
  Plane() = default;
  Plane(int width, int height, double fill = 0.0);
  Plane(int width, int height, std::vector<double> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(int x, int y) noexcept {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  double operator()(int x, int y) const noexcept {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }

  /// Clamp-to-edge read.
  double at_clamped(int x, int y) const noexcept;

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const Plane&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

/// Planar RGB raster with samples in [0, 1]. Every constructor and operation
/// clamps, so a live ImageBuffer never holds out-of-range or non-finite data.
class ImageBuffer {
 public:
  static constexpr int kChannels = 3;

  ImageBuffer() = default;
  ImageBuffer(int width, int height, double fill = 0.0);
  /// Takes planar samples (R plane, G plane, B plane); clamps.
  ImageBuffer(int width, int height, std::vector<double> samples);
  /// Assembles three planes, clamping.
  static ImageBuffer from_planes(const std::array<Plane, 3>& planes);
  /// Interleaved H×W×3 layout, as used by array libraries.
  static ImageBuffer from_interleaved(int width, int height,
                                      std::span<const double> hwc);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }

  double at(int c, int x, int y) const noexcept {
    return samples_[c * pixel_count() + static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<const double> samples() const noexcept { return samples_; }
  std::span<const double> channel(int c) const noexcept {
    return std::span<const double>(samples_).subspan(c * pixel_count(),
                                                     pixel_count());
  }
  Plane plane(int c) const;
  std::vector<double> to_interleaved() const;

  /// Mean over all samples of all channels.
  double mean() const noexcept;

  bool operator==(const ImageBuffer&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> samples_;
};

struct Rgb {
  double r = 0, g = 0, b = 0;
};

struct Hsv {
  double h = 0;  // degrees in [0, 360)
  double s = 0;
  double v = 0;
};

Hsv rgb_to_hsv(Rgb rgb) noexcept;
Rgb hsv_to_rgb(Hsv hsv) noexcept;

/// HSV raster: planes are H (degrees), S, V.
struct HsvImage {
  int width = 0;
  int height = 0;
  std::array<Plane, 3> planes;
};

HsvImage rgb_to_hsv(const ImageBuffer& img);
ImageBuffer hsv_to_rgb(const HsvImage& hsv);

/// Source/target photometric transform of the self-blending pipeline.
struct ColorJitter {
  static constexpr double kMaxBrightness = 0.3;
  static constexpr double kMaxContrast = 0.3;
  static constexpr double kMaxHueDegrees = 18.0;
  static constexpr double kMaxSaturation = 0.3;

  double brightness_delta = 0.0;
  double contrast_delta = 0.0;
  double hue_shift = 0.0;
  double saturation_delta = 0.0;

  bool is_identity() const noexcept {
    return brightness_delta == 0.0 && contrast_delta == 0.0 &&
           hue_shift == 0.0 && saturation_delta == 0.0;
  }
  /// Throws InvalidParameter when a field is outside its range.
  void validate() const;
};

/// Multiplies every sample by (1 + delta) and clamps. delta >= -1.
ImageBuffer adjust_brightness(const ImageBuffer& img, double delta);

/// Separable Gaussian, radius ceil(3 sigma), clamp-to-edge. sigma > 0.
ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma);
Plane gaussian_blur(const Plane& plane, double sigma);
/// Normalized 1-D kernel of length 2*ceil(3 sigma)+1.
std::vector<double> gaussian_kernel(double sigma);

/// Bilinear with half-pixel centers, clamp-to-edge.
ImageBuffer resize_bilinear(const ImageBuffer& img, int out_w, int out_h);
Plane resize_bilinear(const Plane& plane, int out_w, int out_h);

/// Bilinear sample at continuous pixel coordinates (centers at integers),
/// clamp-to-edge.
double sample_bilinear(const Plane& plane, double x, double y) noexcept;

/// Brightness, then contrast about the mean luminance, then hue and
/// saturation through HSV. Rejects jitter outside the ColorJitter bounds.
ImageBuffer apply_color_jitter(const ImageBuffer& img, const ColorJitter& jitter);

/// The same transform without the sampling bounds (any hue rotation; deltas
/// must be >= -1).
ImageBuffer apply_color_transform(const ImageBuffer& img, const ColorJitter& jitter);

}  // namespace blendforge
