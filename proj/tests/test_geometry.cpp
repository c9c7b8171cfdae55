#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <fstream>
#include <set>

#include "blendforge/error.hpp"
#include "blendforge/geometry.hpp"
#include "support.hpp"

using namespace blendforge;
using blendforge::test::disk_mask;
using blendforge::test::max_abs_diff;
using blendforge::test::random_image;

namespace {

// Hull vertices by brute force: p is a vertex iff some other point q makes
// every point lie left of or on the line p->q, and p is not strictly between
// two collinear extremes.
std::set<std::pair<double, double>> brute_force_hull(const std::vector<Point>& pts) {
  std::set<std::pair<double, double>> out;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      bool supporting = true;
      for (std::size_t k = 0; k < n && supporting; ++k) {
        if (cross(pts[i], pts[j], pts[k]) < 0) supporting = false;
      }
      if (!supporting) continue;
      // On a supporting line the extreme points along it are the vertices.
      const double dx = pts[j].x - pts[i].x, dy = pts[j].y - pts[i].y;
      double lo = 0.0, hi = 0.0;
      std::size_t ilo = i, ihi = i;
      for (std::size_t k = 0; k < n; ++k) {
        if (cross(pts[i], pts[j], pts[k]) != 0) continue;
        const double t = (pts[k].x - pts[i].x) * dx + (pts[k].y - pts[i].y) * dy;
        if (t < lo) lo = t, ilo = k;
        if (t > hi) hi = t, ihi = k;
      }
      out.emplace(pts[ilo].x, pts[ilo].y);
      out.emplace(pts[ihi].x, pts[ihi].y);
    }
  }
  return out;
}

// Pixel-center inclusion test against a convex CCW polygon, boundary included.
bool inside_convex(const Polygon& poly, double x, double y) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (cross(poly[i], poly[(i + 1) % poly.size()], Point{x, y}) < 0) return false;
  }
  return true;
}

double signed_area(const Polygon& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point p = poly[i], q = poly[(i + 1) % poly.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

Mask half_plane(int w, int h, int edge) {
  Mask m(w, h);
  std::vector<double> v(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) v[static_cast<std::size_t>(y) * w + x] = x < edge ? 1.0 : 0.0;
  }
  return Mask(w, h, std::move(v));
}

}  // namespace

TEST_CASE("convex_hull small cases") {
  const std::vector<Point> square{{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}};
  const Polygon hull = convex_hull(square);
  REQUIRE(hull.size() == 4);
  for (const Point& p : hull) CHECK_FALSE((p.x == 1 && p.y == 1));
  CHECK(signed_area(hull) == doctest::Approx(4.0));

  const std::vector<Point> tri{{0, 0}, {0, 3}, {4, 0}};  // clockwise input
  const Polygon t = convex_hull(tri);
  REQUIRE(t.size() == 3);
  CHECK(signed_area(t) > 0);
  for (const Point& p : tri) CHECK(std::find(t.begin(), t.end(), p) != t.end());

  const std::vector<Point> line{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  CHECK_THROWS_AS(convex_hull(line), Error);
  try {
    convex_hull(line);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateGeometry);
  }
  LandmarkSet two{{{0, 0}, {5, 5}}, "x"};
  CHECK_THROWS_AS(two.validate(), Error);
}

TEST_CASE("convex_hull matches the brute-force oracle") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point> pts;
    while (pts.size() < 50) {
      const double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1);
      if (x * x + y * y <= 1.0) pts.push_back({x, y});
    }
    const Polygon hull = convex_hull(pts);
    std::set<std::pair<double, double>> got;
    for (const Point& p : hull) got.emplace(p.x, p.y);
    CHECK(got.size() == hull.size());
    CHECK(got == brute_force_hull(pts));
    // Every point left of or on every hull edge; consecutive turns are CCW.
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const Point a = hull[i], b = hull[(i + 1) % hull.size()];
      for (const Point& p : pts) CHECK(cross(a, b, p) >= 0);
      CHECK(cross(a, b, hull[(i + 2) % hull.size()]) > 0);
    }
  }
}

TEST_CASE("convex_hull drops collinear boundary points") {
  const std::vector<Point> pts{{0, 0}, {1, 0}, {2, 0}, {2, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
  CHECK(convex_hull(pts).size() == 4);
}

TEST_CASE("rasterize_polygon") {
  const Polygon sq{{1.5, 1.5}, {2.5, 1.5}, {2.5, 2.5}, {1.5, 2.5}};
  const Mask m = rasterize_polygon(sq, 4, 4);
  double ones = 0;
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      const bool expect = inside_convex(sq, x + 0.5, y + 0.5);
      CHECK(m(x, y) == (expect ? 1.0 : 0.0));
      ones += m(x, y);
    }
  }
  CHECK(ones == 4);

  const Mask outside = rasterize_polygon({{20, 20}, {30, 20}, {25, 30}}, 8, 8);
  for (double v : outside.values()) CHECK(v == 0.0);
  const Mask full = rasterize_polygon({{0, 0}, {8, 0}, {8, 6}, {0, 6}}, 8, 6);
  for (double v : full.values()) CHECK(v == 1.0);
  CHECK_THROWS_AS(rasterize_polygon({}, 4, 4), Error);
}

TEST_CASE("rasterize_polygon agrees with point-in-polygon on random hulls") {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Point> pts;
    for (int i = 0; i < 12; ++i) {
      // Mix of generic and half-integer coordinates to hit boundary centers.
      double x = rng.uniform(-4, 36), y = rng.uniform(-4, 28);
      if (rng.coin()) x = std::floor(x) + 0.5, y = std::floor(y) + 0.5;
      pts.push_back({x, y});
    }
    const Polygon hull = convex_hull(pts);
    const Mask m = rasterize_polygon(hull, 32, 24);
    CHECK(m.is_hard());
    int mismatches = 0;
    for (int y = 0; y < 24; ++y) {
      for (int x = 0; x < 32; ++x) {
        mismatches += (m(x, y) == 1.0) != inside_convex(hull, x + 0.5, y + 0.5);
      }
    }
    CHECK(mismatches == 0);

    // Adding an interior landmark leaves hull and mask unchanged.
    Point c{0, 0};
    for (const Point& p : hull) c.x += p.x / hull.size(), c.y += p.y / hull.size();
    pts.push_back(c);
    CHECK(rasterize_polygon(convex_hull(pts), 32, 24) == m);
  }
}

TEST_CASE("soften_mask") {
  const Mask ones = soften_mask(Mask(24, 24, 1.0), 7.0);
  for (double v : ones.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

  // Half-plane: columns left of the edge are 1. Discrete oracle: the fraction
  // of kernel taps that land on the ones. Continuous erf profile within 1e-2.
  const int edge = 64;
  const Mask hp = half_plane(128, 8, edge);
  const Mask soft = soften_mask(hp, 7.0);
  const auto k = gaussian_kernel(7.0);
  const int r = static_cast<int>(k.size() / 2);
  for (int x = edge - 30; x < edge + 30; ++x) {
    double expect = 0.0;
    for (int j = -r; j <= r; ++j) expect += (x + j < edge) ? k[j + r] : 0.0;
    CHECK(soft(x, 4) == doctest::Approx(expect).epsilon(1e-12));
    const double d = x + 0.5 - edge;
    CHECK(std::fabs(soft(x, 4) - 0.5 * std::erfc(d / (7.0 * std::numbers::sqrt2))) < 1e-2);
  }
  // The edge falls between columns edge-1 and edge; their midpoint value is
  // the mean of the two, 0.5 by symmetry.
  CHECK(std::fabs(0.5 * (soft(edge - 1, 4) + soft(edge, 4)) - 0.5) < 1e-3);

  // Disk: radial profile decays monotonically, never overshoots.
  const Mask disk = disk_mask(96, 96, 48, 48, 20);
  const Mask sd = soften_mask(disk, 7.0);
  for (double v : sd.values()) CHECK((v >= 0.0 && v <= 1.0));
  for (int x = 48; x + 1 < 96; ++x) CHECK(sd(x + 1, 48) <= sd(x, 48) + 1e-15);
  // The 0.5 level set encloses the hard disk's area within 2% while sigma is
  // small next to the radius. Curvature pulls the level set in by about
  // sigma^2 / (2 R): at R = 20, sigma = 7 that is 1.2 px, about 12% of area.
  const Mask big = disk_mask(128, 128, 64, 64, 40);
  for (double sigma : {1.0, 2.0, 3.0}) {
    double half_area = 0.0;
    for (double v : soften_mask(big, sigma).values()) half_area += v >= 0.5 ? 1.0 : 0.0;
    CHECK(std::fabs(half_area - big.area()) / big.area() < 0.02);
  }
  CHECK_THROWS_AS(soften_mask(disk, 0.0), Error);
}

TEST_CASE("elastic_deform_mask") {
  const Mask disk = disk_mask(64, 64, 32, 32, 18);
  CHECK(elastic_deform_mask(disk, 5, ElasticParams{0.0, 8.0}) == disk);
  const ElasticParams p{4.0, 8.0};
  const Mask a = elastic_deform_mask(disk, 99, p);
  CHECK(a == elastic_deform_mask(disk, 99, p));
  CHECK_FALSE(a == elastic_deform_mask(disk, 100, p));
  CHECK_FALSE(a == disk);

  // Over 100 seeds the relative area change peaked at 5.2%; 15% bounds
  // every seed with a wide margin.
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Mask d = elastic_deform_mask(disk, seed, p);
    for (double v : d.values()) REQUIRE((v >= 0.0 && v <= 1.0));
    worst = std::max(worst, std::fabs(d.area() - disk.area()) / disk.area());
  }
  CHECK(worst <= 0.15);
}

TEST_CASE("expanded_crop_window and expand_and_crop") {
  SplitMix64 rng(13);
  const ImageBuffer img = random_image(rng, 300, 300);

  const CropWindow c = expanded_crop_window({100, 100, 200, 200}, 1.3, 300, 300);
  CHECK(c.x0 == 85);
  CHECK(c.y0 == 85);
  CHECK(c.width() == 130);
  CHECK(c.height() == 130);

  const ImageBuffer small = random_image(rng, 40, 30);
  CHECK(max_abs_diff(expand_and_crop(small, {0, 0, 40, 30}, 1.0, 224),
                     resize_bilinear(small, 224, 224)) == 0.0);

  // Corner box: expected window is the expanded box rounded outward and
  // intersected with the raster.
  const FaceBox box{-10, -20, 60, 50};
  const double cx = 25, cy = 15, hw = 35 * 1.3, hh = 35 * 1.3;
  const int ex0 = std::max(0, static_cast<int>(std::floor(cx - hw)));
  const int ey0 = std::max(0, static_cast<int>(std::floor(cy - hh)));
  const int ex1 = std::min(300, static_cast<int>(std::ceil(cx + hw)));
  const int ey1 = std::min(300, static_cast<int>(std::ceil(cy + hh)));
  const CropWindow w = expanded_crop_window(box, 1.3, 300, 300);
  CHECK(w.x0 == ex0);
  CHECK(w.y0 == ey0);
  CHECK(w.x1 == ex1);
  CHECK(w.y1 == ey1);
  const ImageBuffer out = expand_and_crop(img, box, 1.3, 224);
  CHECK(out.width() == 224);
  CHECK(out.height() == 224);
  std::array<Plane, 3> cut{Plane(ex1 - ex0, ey1 - ey0), Plane(ex1 - ex0, ey1 - ey0),
                           Plane(ex1 - ex0, ey1 - ey0)};
  for (int ch = 0; ch < 3; ++ch) {
    for (int y = ey0; y < ey1; ++y) {
      for (int x = ex0; x < ex1; ++x) cut[ch](x - ex0, y - ey0) = img.at(ch, x, y);
    }
  }
  CHECK(max_abs_diff(out, resize_bilinear(ImageBuffer::from_planes(cut), 224, 224)) == 0.0);

  CHECK_THROWS_AS(expand_and_crop(img, {400, 400, 500, 500}), Error);
  CHECK_THROWS_AS(expand_and_crop(img, {10, 10, 10, 40}), Error);
}

TEST_CASE("crop_face maps landmarks into the crop") {
  SplitMix64 rng(14);
  const ImageBuffer img = random_image(rng, 200, 160);
  const LandmarkSet lm{{{60, 50}, {140, 50}, {100, 120}, {70, 100}}, "f.png"};
  const FaceCrop crop = crop_face(img, lm);
  CHECK(crop.image.width() == 224);
  const double sx = 224.0 / crop.window.width();
  const double sy = 224.0 / crop.window.height();
  for (std::size_t i = 0; i < lm.points.size(); ++i) {
    CHECK(crop.landmarks.points[i].x == doctest::Approx((lm.points[i].x - crop.window.x0) * sx));
    CHECK(crop.landmarks.points[i].y == doctest::Approx((lm.points[i].y - crop.window.y0) * sy));
  }
}

TEST_CASE("landmark file round trip and schema errors") {
  blendforge::test::TempDir dir("landmarks");
  LandmarkIndex index;
  index["a.png"] = LandmarkSet{{{1, 2}, {3.5, 4}, {0, 9}}, "a.png"};
  index["b.png"] = LandmarkSet{{{10, 2}, {30.25, 4}, {0, 19}, {7, 7}}, "b.png"};
  save_landmarks(dir.path() / "lm.json", index);
  const LandmarkIndex back = load_landmarks(dir.path() / "lm.json");
  REQUIRE(back.size() == 2);
  CHECK(back.at("b.png").points == index.at("b.png").points);
  CHECK(back.at("a.png").image_ref == "a.png");

  std::ofstream(dir.path() / "bad.json") << "{\n  \"frames\": {\n    \"x.png\": [[1, 2], [3]]\n  }\n}\n";
  CHECK_THROWS_AS(load_landmarks(dir.path() / "bad.json"), Error);
  CHECK_THROWS_AS(load_landmarks(dir.path() / "missing.json"), Error);
}
