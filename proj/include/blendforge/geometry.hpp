#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "blendforge/image.hpp"

namespace blendforge {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

/// Twice the signed area of triangle (o, a, b); positive when b is left of o->a.
double cross(Point o, Point a, Point b) noexcept;

/// Facial keypoints of one frame, in that frame's pixel coordinates.
struct LandmarkSet {
  std::vector<Point> points;
  std::string image_ref;

  /// Throws DegenerateGeometry for fewer than 3 points, non-finite
  /// coordinates, or an all-collinear set.
  void validate() const;
  /// True when any point lies outside [0, width] x [0, height].
  bool has_out_of_bounds(int width, int height) const noexcept;
};

/// Landmark file: { "frames": { "<filename>": [[x, y], ...] } }.
using LandmarkIndex = std::map<std::string, LandmarkSet>;
LandmarkIndex load_landmarks(const std::filesystem::path& path);
void save_landmarks(const std::filesystem::path& path, const LandmarkIndex& index);

using Polygon = std::vector<Point>;

/// Single-channel alpha raster with values in [0, 1] (clamped on construction).
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, double fill = 0.0);
  Mask(int width, int height, std::vector<double> values);
  explicit Mask(const Plane& plane);

  int width() const noexcept { return plane_.width(); }
  int height() const noexcept { return plane_.height(); }
  double operator()(int x, int y) const noexcept { return plane_(x, y); }
  std::span<const double> values() const noexcept { return plane_.values(); }
  const Plane& plane() const noexcept { return plane_; }

  /// Every value is exactly 0 or 1.
  bool is_hard() const noexcept;
  /// Fraction of pixels with value > 0.
  double support_fraction() const noexcept;
  /// Sum of values (soft area in pixels).
  double area() const noexcept;
  Mask scaled(double factor) const;

  bool operator==(const Mask&) const = default;

 private:
  Plane plane_;
};

struct FaceBox {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  double width() const noexcept { return x1 - x0; }
  double height() const noexcept { return y1 - y0; }
  /// Axis-aligned bounding box of a landmark set.
  static FaceBox around(const LandmarkSet& landmarks);
};

/// Andrew's monotone chain. Counter-clockwise in a y-up frame (positive
/// signed area), no duplicates, collinear boundary points dropped.
Polygon convex_hull(std::span<const Point> points);
Polygon convex_hull(const LandmarkSet& landmarks);

/// Hard mask: 1 where the pixel center (x + 0.5, y + 0.5) is inside the
/// polygon or on its boundary.
Mask rasterize_polygon(const Polygon& polygon, int width, int height);

Mask soften_mask(const Mask& mask, double sigma);

struct ElasticParams {
  double amplitude = 0.0;     // peak displacement in pixels
  double field_sigma = 8.0;   // smoothing of the noise field in pixels
};

/// Warps the mask by a seeded smooth displacement field. Amplitude 0 returns
/// the input unchanged.
Mask elastic_deform_mask(const Mask& mask, std::uint64_t seed,
                         const ElasticParams& params);

struct CropWindow {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open pixel rectangle

  int width() const noexcept { return x1 - x0; }
  int height() const noexcept { return y1 - y0; }
};

/// The box scaled about its center by margin, rounded outward to pixels and
/// intersected with the image.
CropWindow expanded_crop_window(const FaceBox& box, double margin, int image_w,
                                int image_h);

ImageBuffer expand_and_crop(const ImageBuffer& img, const FaceBox& box,
                            double margin = 1.3, int out = 224);

struct FaceCrop {
  ImageBuffer image;
  LandmarkSet landmarks;  // in crop coordinates
  CropWindow window;
};

/// Preprocessing used by the generators: landmark box, 1.3x margin, square
/// resize, with landmarks mapped into the output frame.
FaceCrop crop_face(const ImageBuffer& img, const LandmarkSet& landmarks,
                   double margin = 1.3, int out = 224);

}  // namespace blendforge
