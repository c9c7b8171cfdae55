#include "blendforge/fixtures.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "blendforge/png_io.hpp"
#include "blendforge/rng.hpp"
#include "blendforge/version.hpp"

namespace blendforge {

namespace fs = std::filesystem;

namespace {

struct Ellipse {
  double cx, cy, rx, ry;

  // < 1 inside
  double level(double x, double y) const noexcept {
    const double dx = (x - cx) / rx;
    const double dy = (y - cy) / ry;
    return dx * dx + dy * dy;
  }
  Point at(double angle, double scale = 1.0) const noexcept {
    return {cx + scale * rx * std::cos(angle), cy + scale * ry * std::sin(angle)};
  }
};

// Paints color into planes through a coverage plane.
void paint(std::array<Plane, 3>& planes, const Plane& coverage,
           const std::array<double, 3>& color) {
  for (int c = 0; c < 3; ++c) {
    auto dst = planes[c].values();
    const auto a = coverage.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = a[i] * color[c] + (1 - a[i]) * dst[i];
  }
}

Plane ellipse_coverage(const Ellipse& e, int w, int h, double softness) {
  Plane p(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) p(x, y) = e.level(x + 0.5, y + 0.5) <= 1.0 ? 1.0 : 0.0;
  }
  return softness > 0 ? gaussian_blur(p, softness) : p;
}

double gaussian_noise(SplitMix64& rng) {
  // Irwin-Hall approximation, unit variance.
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) acc += rng.uniform();
  return (acc - 2.0) * std::sqrt(3.0);
}

}  // namespace

SyntheticFrame synthesize_face_frame(std::uint64_t scene_seed, int frame_idx, int width,
                                     int height) {
  SplitMix64 scene(scene_seed);
  SplitMix64 frame_rng(derive_seed(scene_seed, fmt::format("frame{}", frame_idx)));
  const int w = width;
  const int h = height;

  // Background: base color, gradient, a few soft-edged panels, mild texture.
  std::array<double, 3> base;
  for (double& b : base) b = scene.uniform(0.2, 0.55);
  const double gx = scene.uniform(-0.15, 0.15);
  const double gy = scene.uniform(-0.15, 0.15);
  const double freq = scene.uniform(0.02, 0.08);
  const double phase = scene.uniform(0.0, 2 * std::numbers::pi);
  std::array<Plane, 3> planes{Plane(w, h), Plane(w, h), Plane(w, h)};
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double u = static_cast<double>(x) / w - 0.5;
        const double v = static_cast<double>(y) / h - 0.5;
        planes[c](x, y) = base[c] + gx * u + gy * v +
                          0.03 * std::sin(freq * x + phase) * std::cos(freq * 0.7 * y);
      }
    }
  }
  const int panels = 2 + static_cast<int>(scene.below(3));
  for (int i = 0; i < panels; ++i) {
    const int x0 = static_cast<int>(scene.uniform(0, w * 0.8));
    const int y0 = static_cast<int>(scene.uniform(0, h * 0.8));
    const int x1 = std::min(w, x0 + static_cast<int>(scene.uniform(w * 0.1, w * 0.5)));
    const int y1 = std::min(h, y0 + static_cast<int>(scene.uniform(h * 0.1, h * 0.5)));
    Plane cover(w, h);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) cover(x, y) = 1.0;
    }
    cover = gaussian_blur(cover, 1.5);
    std::array<double, 3> color;
    for (int c = 0; c < 3; ++c) color[c] = std::clamp(base[c] + scene.uniform(-0.15, 0.15), 0.05, 0.9);
    paint(planes, cover, color);
  }

  // Face ellipse, slightly shifted per frame.
  const double shift_x = frame_rng.uniform(-3.0, 3.0);
  const double shift_y = frame_rng.uniform(-3.0, 3.0);
  const Ellipse face{w * scene.uniform(0.45, 0.55) + shift_x,
                     h * scene.uniform(0.47, 0.55) + shift_y, w * scene.uniform(0.2, 0.25),
                     h * scene.uniform(0.27, 0.32)};
  const double tone = scene.uniform(0.75, 1.1);
  const std::array<double, 3> skin{0.58 * tone, 0.44 * tone, 0.36 * tone};
  {
    const Plane cover = ellipse_coverage(face, w, h, 1.2);
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double a = cover(x, y);
          if (a <= 0.0) continue;
          const double shade = 1.0 - 0.18 * std::min(1.0, face.level(x + 0.5, y + 0.5)) -
                               0.05 * (x - face.cx) / face.rx;
          planes[c](x, y) = a * skin[c] * shade + (1 - a) * planes[c](x, y);
        }
      }
    }
  }

  const double eye_dx = face.rx * 0.42;
  const double eye_y = face.cy - face.ry * 0.18;
  const double eye_rx = face.rx * 0.16;
  const double eye_ry = face.ry * 0.07;
  const Ellipse left_eye{face.cx - eye_dx, eye_y, eye_rx, eye_ry};
  const Ellipse right_eye{face.cx + eye_dx, eye_y, eye_rx, eye_ry};
  const Ellipse mouth{face.cx, face.cy + face.ry * 0.48, face.rx * 0.3, face.ry * 0.07};
  const Ellipse left_brow{left_eye.cx, eye_y - face.ry * 0.15, eye_rx * 1.2, eye_ry * 0.45};
  const Ellipse right_brow{right_eye.cx, eye_y - face.ry * 0.15, eye_rx * 1.2, eye_ry * 0.45};
  paint(planes, ellipse_coverage(left_eye, w, h, 0.8), {0.12, 0.1, 0.1});
  paint(planes, ellipse_coverage(right_eye, w, h, 0.8), {0.12, 0.1, 0.1});
  paint(planes, ellipse_coverage(left_brow, w, h, 0.8), {0.2, 0.15, 0.12});
  paint(planes, ellipse_coverage(right_brow, w, h, 0.8), {0.2, 0.15, 0.12});
  paint(planes, ellipse_coverage(mouth, w, h, 0.8),
        {0.5 * tone, 0.22 * tone, 0.22 * tone});

  // Sensor noise, lightly correlated.
  const double noise_sigma = scene.uniform(0.008, 0.025);
  for (int c = 0; c < 3; ++c) {
    Plane noise(w, h);
    for (double& v : noise.values()) v = gaussian_noise(frame_rng) * noise_sigma;
    noise = gaussian_blur(noise, 0.6);
    for (std::size_t i = 0; i < noise.size(); ++i) planes[c].values()[i] += noise.values()[i];
  }

  SyntheticFrame out;
  out.image = ImageBuffer::from_planes(planes);

  // 68-point layout in the usual order.
  auto& pts = out.landmarks.points;
  for (int i = 0; i < 17; ++i) {  // jaw, ear to ear through the chin
    const double angle = std::numbers::pi * (1.0 - i / 16.0) * 1.1 - 0.05 * std::numbers::pi;
    pts.push_back(face.at(angle, 0.93));
  }
  for (const Ellipse* brow : {&left_brow, &right_brow}) {
    for (int i = 0; i < 5; ++i) {
      pts.push_back({brow->cx - brow->rx + i * brow->rx / 2.0, brow->cy - brow->ry});
    }
  }
  for (int i = 0; i < 4; ++i) pts.push_back({face.cx, eye_y + i * face.ry * 0.1});
  for (int i = 0; i < 5; ++i) {
    pts.push_back({face.cx - face.rx * 0.16 + i * face.rx * 0.08, face.cy + face.ry * 0.22});
  }
  for (const Ellipse* eye : {&left_eye, &right_eye}) {
    for (int i = 0; i < 6; ++i) pts.push_back(eye->at(std::numbers::pi * (1.0 + i / 3.0)));
  }
  for (int i = 0; i < 12; ++i) pts.push_back(mouth.at(std::numbers::pi * (1.0 + i / 6.0)));
  for (int i = 0; i < 8; ++i) pts.push_back(mouth.at(std::numbers::pi * (1.0 + i / 4.0), 0.5));
  return out;
}

FixtureCorpus write_fixture_corpus(const fs::path& dir, int videos, int frames_per_video,
                                   std::uint64_t seed, int width, int height) {
  fs::create_directories(dir / "frames");
  FixtureCorpus corpus;
  corpus.manifest.root = dir;
  for (int v = 0; v < videos; ++v) {
    const std::string video_id = fmt::format("video{:03d}", v);
    const std::uint64_t scene_seed = derive_seed(seed, video_id);
    for (int f = 0; f < frames_per_video; ++f) {
      SyntheticFrame frame = synthesize_face_frame(scene_seed, f, width, height);
      const std::string file = fmt::format("{}_{:03d}.png", video_id, f);
      write_png(dir / "frames" / file, frame.image);
      frame.landmarks.image_ref = file;
      corpus.landmarks.emplace(file, std::move(frame.landmarks));
      corpus.manifest.records.push_back(
          {"frames/" + file, Label::Real, video_id, f, "fixture", std::nullopt});
    }
  }
  corpus.manifest.metadata = {{"generator", "blendforge"},
                              {"version", kVersion},
                              {"kind", "fixture"},
                              {"seed", seed},
                              {"videos", videos},
                              {"frames_per_video", frames_per_video}};
  save_manifest(dir / "manifest.json", corpus.manifest);
  save_landmarks(dir / "landmarks.json", corpus.landmarks);
  return corpus;
}

}  // namespace blendforge
