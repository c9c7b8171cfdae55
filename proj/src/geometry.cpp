#include "blendforge/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "blendforge/error.hpp"
#include "blendforge/rng.hpp"
#include "json_util.hpp"

namespace blendforge {

double cross(Point o, Point a, Point b) noexcept {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

void LandmarkSet::validate() const {
  if (points.size() < 3) {
    throw Error(ErrorCode::DegenerateGeometry,
                fmt::format("landmark set '{}' has {} points, need at least 3",
                            image_ref, points.size()));
  }
  for (const Point& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::DegenerateGeometry,
                  fmt::format("landmark set '{}' has a non-finite coordinate",
                              image_ref));
    }
  }
  const Point a = points[0];
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i] == a) continue;
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (cross(a, points[i], points[j]) != 0.0) return;
    }
    break;
  }
  throw Error(ErrorCode::DegenerateGeometry,
              fmt::format("landmark set '{}' is collinear", image_ref));
}

bool LandmarkSet::has_out_of_bounds(int width, int height) const noexcept {
  return std::any_of(points.begin(), points.end(), [&](const Point& p) {
    return p.x < 0 || p.y < 0 || p.x > width || p.y > height;
  });
}

LandmarkIndex load_landmarks(const std::filesystem::path& path) {
  const auto doc = detail::parse_json_file(path);
  auto schema_error = [&](const std::string& what) {
    return LocatedError(ErrorCode::Schema,
                        fmt::format("{}: {}", path.string(), what), path.string());
  };
  if (!doc.is_object() || !doc.contains("frames") || !doc["frames"].is_object()) {
    throw schema_error("expected an object with a \"frames\" object");
  }
  LandmarkIndex index;
  for (const auto& [name, pts] : doc["frames"].items()) {
    if (!pts.is_array()) throw schema_error(fmt::format("frame '{}': expected array", name));
    LandmarkSet set;
    set.image_ref = name;
    for (const auto& p : pts) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        throw schema_error(fmt::format("frame '{}': points must be [x, y] pairs", name));
      }
      set.points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    if (set.points.size() < 3) {
      throw schema_error(fmt::format("frame '{}': fewer than 3 points", name));
    }
    index.emplace(name, std::move(set));
  }
  return index;
}

void save_landmarks(const std::filesystem::path& path, const LandmarkIndex& index) {
  nlohmann::json frames = nlohmann::json::object();
  for (const auto& [name, set] : index) {
    auto pts = nlohmann::json::array();
    for (const Point& p : set.points) pts.push_back({p.x, p.y});
    frames[name] = std::move(pts);
  }
  detail::write_json_file(path, {{"frames", frames}});
}

Mask::Mask(int width, int height, double fill)
    : plane_(width, height, std::clamp(fill, 0.0, 1.0)) {}

Mask::Mask(int width, int height, std::vector<double> values)
    : Mask(Plane(width, height, std::move(values))) {}

Mask::Mask(const Plane& plane) : plane_(plane) {
  for (double& v : plane_.values()) v = (v > 0.0) ? std::min(v, 1.0) : 0.0;
}

bool Mask::is_hard() const noexcept {
  return std::all_of(values().begin(), values().end(),
                     [](double v) { return v == 0.0 || v == 1.0; });
}

double Mask::support_fraction() const noexcept {
  const auto n = std::count_if(values().begin(), values().end(),
                               [](double v) { return v > 0.0; });
  return static_cast<double>(n) / static_cast<double>(values().size());
}

double Mask::area() const noexcept {
  double acc = 0.0;
  for (double v : values()) acc += v;
  return acc;
}

Mask Mask::scaled(double factor) const {
  Plane p = plane_;
  for (double& v : p.values()) v *= factor;
  return Mask(p);
}

FaceBox FaceBox::around(const LandmarkSet& landmarks) {
  landmarks.validate();
  FaceBox box{landmarks.points[0].x, landmarks.points[0].y, landmarks.points[0].x,
              landmarks.points[0].y};
  for (const Point& p : landmarks.points) {
    box.x0 = std::min(box.x0, p.x);
    box.y0 = std::min(box.y0, p.y);
    box.x1 = std::max(box.x1, p.x);
    box.y1 = std::max(box.y1, p.y);
  }
  return box;
}

Polygon convex_hull(std::span<const Point> input) {
  std::vector<Point> pts(input.begin(), input.end());
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) {
    throw Error(ErrorCode::DegenerateGeometry, "convex hull needs 3 distinct points");
  }
  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) {
    throw Error(ErrorCode::DegenerateGeometry, "all points are collinear");
  }
  return hull;
}

Polygon convex_hull(const LandmarkSet& landmarks) {
  landmarks.validate();
  return convex_hull(std::span<const Point>(landmarks.points));
}

Mask rasterize_polygon(const Polygon& polygon, int width, int height) {
  if (polygon.empty()) {
    throw Error(ErrorCode::DegenerateGeometry, "cannot rasterize an empty polygon");
  }
  Plane out(width, height);
  const std::size_t n = polygon.size();
  std::vector<double> crossings;
  for (int y = 0; y < height; ++y) {
    const double yc = y + 0.5;
    crossings.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point a = polygon[i];
      const Point b = polygon[(i + 1) % n];
      if ((a.y <= yc && yc < b.y) || (b.y <= yc && yc < a.y)) {
        crossings.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(crossings.begin(), crossings.end());
    auto fill_span = [&](double xa, double xb) {
      // centers x + 0.5 within [xa, xb]
      const int first = std::max(0, static_cast<int>(std::ceil(xa - 0.5)));
      const int last = std::min(width - 1, static_cast<int>(std::floor(xb - 0.5)));
      for (int x = first; x <= last; ++x) out(x, y) = 1.0;
    };
    for (std::size_t i = 0; i + 1 < crossings.size(); i += 2) {
      fill_span(crossings[i], crossings[i + 1]);
    }
    // Boundary points: horizontal edges on this scanline and edge/vertex touches
    // that the half-open crossing rule leaves out.
    for (std::size_t i = 0; i < n; ++i) {
      const Point a = polygon[i];
      const Point b = polygon[(i + 1) % n];
      if (a.y == yc && b.y == yc) {
        fill_span(std::min(a.x, b.x), std::max(a.x, b.x));
      } else if (std::min(a.y, b.y) <= yc && yc <= std::max(a.y, b.y)) {
        const double xi = a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y);
        const double cell = xi - 0.5;
        if (cell == std::floor(cell) && cell >= 0 && cell < width) {
          out(static_cast<int>(cell), y) = 1.0;
        }
      }
    }
  }
  return Mask(out);
}

Mask soften_mask(const Mask& mask, double sigma) {
  return Mask(gaussian_blur(mask.plane(), sigma));
}

Mask elastic_deform_mask(const Mask& mask, std::uint64_t seed,
                         const ElasticParams& params) {
  if (!(params.amplitude >= 0.0) || !std::isfinite(params.amplitude)) {
    throw Error(ErrorCode::InvalidParameter, "deformation amplitude must be >= 0");
  }
  if (params.amplitude == 0.0) return mask;
  const int w = mask.width();
  const int h = mask.height();
  SplitMix64 rng(seed);
  Plane dx(w, h), dy(w, h);
  for (double& v : dx.values()) v = rng.uniform(-1.0, 1.0);
  for (double& v : dy.values()) v = rng.uniform(-1.0, 1.0);
  dx = gaussian_blur(dx, params.field_sigma);
  dy = gaussian_blur(dy, params.field_sigma);
  double peak = 0.0;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    peak = std::max({peak, std::fabs(dx.values()[i]), std::fabs(dy.values()[i])});
  }
  if (peak == 0.0) return mask;
  const double scale = params.amplitude / peak;
  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out(x, y) = sample_bilinear(mask.plane(), x + dx(x, y) * scale,
                                  y + dy(x, y) * scale);
    }
  }
  return Mask(out);
}

CropWindow expanded_crop_window(const FaceBox& box, double margin, int image_w,
                                int image_h) {
  if (!(box.x1 > box.x0) || !(box.y1 > box.y0)) {
    throw Error(ErrorCode::DegenerateGeometry, "face box is degenerate");
  }
  if (!(margin > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "crop margin must be positive");
  }
  const double cx = 0.5 * (box.x0 + box.x1);
  const double cy = 0.5 * (box.y0 + box.y1);
  const double hw = 0.5 * box.width() * margin;
  const double hh = 0.5 * box.height() * margin;
  CropWindow win;
  win.x0 = std::max(0, static_cast<int>(std::floor(cx - hw)));
  win.y0 = std::max(0, static_cast<int>(std::floor(cy - hh)));
  win.x1 = std::min(image_w, static_cast<int>(std::ceil(cx + hw)));
  win.y1 = std::min(image_h, static_cast<int>(std::ceil(cy + hh)));
  if (win.x1 <= win.x0 || win.y1 <= win.y0) {
    throw Error(ErrorCode::DegenerateGeometry,
                "face box does not intersect the image after expansion");
  }
  return win;
}

namespace {

ImageBuffer crop_window(const ImageBuffer& img, const CropWindow& win) {
  const int w = win.width();
  const int h = win.height();
  std::vector<double> samples(static_cast<std::size_t>(w) * h * 3);
  std::size_t i = 0;
  for (int c = 0; c < 3; ++c) {
    for (int y = win.y0; y < win.y1; ++y) {
      for (int x = win.x0; x < win.x1; ++x) samples[i++] = img.at(c, x, y);
    }
  }
  return ImageBuffer(w, h, std::move(samples));
}

}  // namespace

ImageBuffer expand_and_crop(const ImageBuffer& img, const FaceBox& box,
                            double margin, int out) {
  const CropWindow win = expanded_crop_window(box, margin, img.width(), img.height());
  return resize_bilinear(crop_window(img, win), out, out);
}

FaceCrop crop_face(const ImageBuffer& img, const LandmarkSet& landmarks,
                   double margin, int out) {
  const FaceBox box = FaceBox::around(landmarks);
  const CropWindow win = expanded_crop_window(box, margin, img.width(), img.height());
  FaceCrop crop{resize_bilinear(crop_window(img, win), out, out), landmarks, win};
  const double sx = static_cast<double>(out) / win.width();
  const double sy = static_cast<double>(out) / win.height();
  for (Point& p : crop.landmarks.points) {
    p.x = (p.x - win.x0) * sx;
    p.y = (p.y - win.y0) * sy;
  }
  return crop;
}

}  // namespace blendforge
