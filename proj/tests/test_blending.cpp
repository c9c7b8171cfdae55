#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "blendforge/blending.hpp"
#include "blendforge/error.hpp"
#include "support.hpp"

using namespace blendforge;
using blendforge::test::dense_poisson;
using blendforge::test::max_abs_diff;
using blendforge::test::random_image;
using blendforge::test::random_mask;

namespace {

// --- Naive pyramid: dense 2-D Gaussian (sigma 1, radius 3), clamp-to-edge.

Plane naive_blur(const Plane& in) {
  const int r = 3;
  double total = 0.0;
  for (int j = -r; j <= r; ++j) {
    for (int i = -r; i <= r; ++i) total += std::exp(-0.5 * (i * i + j * j));
  }
  Plane out(in.width(), in.height());
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < in.width(); ++x) {
      double acc = 0.0;
      for (int j = -r; j <= r; ++j) {
        for (int i = -r; i <= r; ++i) {
          acc += std::exp(-0.5 * (i * i + j * j)) / total * in.at_clamped(x + i, y + j);
        }
      }
      out(x, y) = acc;
    }
  }
  return out;
}

Plane naive_down(const Plane& in) {
  const Plane b = naive_blur(in);
  Plane out((in.width() + 1) / 2, (in.height() + 1) / 2);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) out(x, y) = b(2 * x, 2 * y);
  }
  return out;
}

Plane naive_up(const Plane& in, int w, int h) {
  Plane z(w, h);
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < in.width(); ++x) z(2 * x, 2 * y) = 4.0 * in(x, y);
  }
  return naive_blur(z);
}

Plane naive_laplacian_blend(const Plane& f, const Plane& b, const Plane& m, int levels) {
  std::vector<Plane> gf{f}, gb{b}, gm{m};
  for (int l = 1; l < levels; ++l) {
    gf.push_back(naive_down(gf.back()));
    gb.push_back(naive_down(gb.back()));
    gm.push_back(naive_down(gm.back()));
  }
  auto mix = [](const Plane& lf, const Plane& lb, const Plane& w) {
    Plane out(lf.width(), lf.height());
    for (int y = 0; y < out.height(); ++y) {
      for (int x = 0; x < out.width(); ++x) {
        out(x, y) = w(x, y) * lf(x, y) + (1 - w(x, y)) * lb(x, y);
      }
    }
    return out;
  };
  Plane acc = mix(gf.back(), gb.back(), gm.back());
  for (int l = levels - 2; l >= 0; --l) {
    const int w = gf[l].width(), h = gf[l].height();
    const Plane uf = naive_up(gf[l + 1], w, h), ub = naive_up(gb[l + 1], w, h);
    Plane lf(w, h), lb(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        lf(x, y) = gf[l](x, y) - uf(x, y);
        lb(x, y) = gb[l](x, y) - ub(x, y);
      }
    }
    const Plane band = mix(lf, lb, gm[l]);
    const Plane up = naive_up(acc, w, h);
    acc = Plane(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) acc(x, y) = band(x, y) + up(x, y);
    }
  }
  return acc;
}

Mask square_mask(int w, int h, int x0, int y0, int side) {
  std::vector<double> v(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = y0; y < y0 + side; ++y) {
    for (int x = x0; x < x0 + side; ++x) v[static_cast<std::size_t>(y) * w + x] = 1.0;
  }
  return Mask(w, h, std::move(v));
}

double rms(const Plane& a, const Plane& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.values()[i] - b.values()[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.size()));
}

}  // namespace

TEST_CASE("alpha_blend identities") {
  SplitMix64 rng(21);
  const ImageBuffer fg = random_image(rng, 20, 14);
  const ImageBuffer bg = random_image(rng, 20, 14);
  CHECK(alpha_blend(fg, bg, Mask(20, 14, 1.0)) == fg);
  CHECK(alpha_blend(fg, bg, Mask(20, 14, 0.0)) == bg);
  const ImageBuffer mid =
      alpha_blend(ImageBuffer(5, 5, 0.8), ImageBuffer(5, 5, 0.2), Mask(5, 5, 0.5));
  for (double v : mid.samples()) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));

  const Mask m = random_mask(rng, 20, 14);
  const ImageBuffer out = alpha_blend(fg, bg, m);
  for (std::size_t i = 0; i < out.samples().size(); ++i) {
    const double f = fg.samples()[i], b = bg.samples()[i];
    CHECK(out.samples()[i] >= std::min(f, b));
    CHECK(out.samples()[i] <= std::max(f, b));
  }
  CHECK_THROWS_AS(alpha_blend(fg, bg, Mask(19, 14, 1.0)), Error);
  CHECK_THROWS_AS(alpha_blend(fg, random_image(rng, 20, 13), Mask(20, 14, 1.0)), Error);
}

TEST_CASE("pyramid build and collapse reconstructs the input") {
  SplitMix64 rng(22);
  for (int t = 0; t < 10; ++t) {
    Plane p(37 + t, 29 + 2 * t);
    for (double& v : p.values()) v = rng.uniform();
    for (int levels = 1; levels <= 4; ++levels) {
      const auto pyr = laplacian_pyramid(p, levels);
      REQUIRE(static_cast<int>(pyr.size()) == levels);
      CHECK(rms(collapse_laplacian_pyramid(pyr), p) <= 1e-5);
    }
  }
  CHECK(max_pyramid_levels(64, 64) == 6);
  CHECK(max_pyramid_levels(37, 100) == 5);
  CHECK(pyr_down(Plane(7, 5)).width() == 4);
  CHECK(pyr_down(Plane(7, 5)).height() == 3);
}

TEST_CASE("laplacian_blend against the naive pyramid") {
  // 32x32 step edge: fg bright, bg dark, half-plane mask.
  Plane f(32, 32), b(32, 32), m(32, 32);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      f(x, y) = x < 20 ? 0.9 : 0.6;
      b(x, y) = y < 12 ? 0.1 : 0.35;
      m(x, y) = x < 16 ? 1.0 : 0.0;
    }
  }
  const ImageBuffer fg = ImageBuffer::from_planes({f, f, f});
  const ImageBuffer bg = ImageBuffer::from_planes({b, b, b});
  const ImageBuffer got = laplacian_blend(fg, bg, Mask(m), 3);
  Plane want = naive_laplacian_blend(f, b, m, 3);
  for (double& v : want.values()) v = std::clamp(v, 0.0, 1.0);
  for (int c = 0; c < 3; ++c) CHECK(max_abs_diff(got.plane(c), want) < 1e-5);

  SplitMix64 rng(23);
  const ImageBuffer rf = random_image(rng, 24, 20), rb = random_image(rng, 24, 20);
  const Mask rm = random_mask(rng, 24, 20);
  const ImageBuffer rgot = laplacian_blend(rf, rb, rm, 3);
  for (int c = 0; c < 3; ++c) {
    Plane w = naive_laplacian_blend(rf.plane(c), rb.plane(c), rm.plane(), 3);
    for (double& v : w.values()) v = std::clamp(v, 0.0, 1.0);
    CHECK(max_abs_diff(rgot.plane(c), w) < 1e-5);
  }
}

TEST_CASE("laplacian_blend degenerate cases") {
  SplitMix64 rng(24);
  const ImageBuffer fg = random_image(rng, 32, 24), bg = random_image(rng, 32, 24);
  const Mask m = random_mask(rng, 32, 24);
  for (int levels = 1; levels <= 4; ++levels) {
    CHECK(max_abs_diff(laplacian_blend(bg, bg, m, levels), bg) < 1e-5);
    CHECK(max_abs_diff(laplacian_blend(fg, bg, Mask(32, 24, 1.0), levels), fg) < 1e-5);
  }
  CHECK(max_abs_diff(laplacian_blend(fg, bg, m, 1), alpha_blend(fg, bg, m)) < 1e-5);
  CHECK_THROWS_AS(laplacian_blend(fg, bg, m, 0), Error);
  CHECK_THROWS_AS(laplacian_blend(fg, bg, m, max_pyramid_levels(32, 24) + 1), Error);
}

TEST_CASE("poisson_blend matches the dense direct solve") {
  SplitMix64 rng(25);
  for (int t = 0; t < 5; ++t) {
    const ImageBuffer fg = random_image(rng, 16, 16), bg = random_image(rng, 16, 16);
    const Mask m = square_mask(16, 16, 5, 5, 6);
    const PoissonResult r = poisson_blend(fg, bg, m);
    CHECK(r.unknowns == 36);
    for (int c = 0; c < 3; ++c) {
      CHECK(max_abs_diff(r.image.plane(c), dense_poisson(fg.plane(c), bg.plane(c), m)) < 1e-4);
      CHECK(r.channels[c].residual <= 1e-6);
      CHECK(r.channels[c].iterations <= default_poisson_max_iters(36));
    }
    // Outside the region the output is bg.
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
          if (m(x, y) == 0.0) CHECK(r.image.at(c, x, y) == bg.at(c, x, y));
        }
      }
    }
  }
}

TEST_CASE("poisson_blend constants and identities") {
  const Mask m = square_mask(20, 18, 4, 3, 9);
  const PoissonResult r = poisson_blend(ImageBuffer(20, 18, 0.8), ImageBuffer(20, 18, 0.3), m);
  for (double v : r.image.samples()) CHECK(v == doctest::Approx(0.3).epsilon(1e-5));

  SplitMix64 rng(26);
  const ImageBuffer bg = random_image(rng, 20, 18);
  CHECK(max_abs_diff(poisson_blend(bg, bg, m).image, bg) < 1e-5);
  // All three modes agree on identical sources.
  for (const BlendMode& mode : {BlendMode{AlphaMode{}}, BlendMode{LaplacianMode{3}},
                                BlendMode{PoissonMode{}}}) {
    CHECK(max_abs_diff(blend(bg, bg, m, mode), bg) < 1e-5);
  }
}

TEST_CASE("poisson_blend errors") {
  const ImageBuffer img(12, 12, 0.5);
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  CHECK(code_of([&] { poisson_blend(img, img, square_mask(12, 12, 0, 3, 4)); }) ==
        ErrorCode::InvalidRegion);
  CHECK(code_of([&] { poisson_blend(img, img, Mask(12, 12, 0.0)); }) ==
        ErrorCode::InvalidRegion);
  CHECK(code_of([&] { poisson_blend(img, img, Mask(12, 12, 0.5)); }) ==
        ErrorCode::InvalidParameter);

  SplitMix64 rng(27);
  const ImageBuffer fg = random_image(rng, 24, 24), bg = random_image(rng, 24, 24);
  try {
    poisson_blend(fg, bg, square_mask(24, 24, 3, 3, 18), PoissonOptions{1e-12, 2});
    FAIL("expected non-convergence");
  } catch (const ConvergenceError& e) {
    CHECK(e.code() == ErrorCode::Convergence);
    CHECK(e.residual() > 1e-12);
  }
  CHECK_THROWS_AS(validate_blend_mode(PoissonMode{0.0, 10}, 10, 10), Error);
  CHECK_THROWS_AS(validate_blend_mode(LaplacianMode{9}, 16, 16), Error);
  CHECK_NOTHROW(validate_blend_mode(LaplacianMode{4}, 16, 16));
}
