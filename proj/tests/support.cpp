#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <utility>
#include <vector>

#include <unistd.h>

#include "blendforge/png_io.hpp"

namespace blendforge::test {

namespace fs = std::filesystem;

ImageBuffer random_image(SplitMix64& rng, int width, int height, double lo, double hi) {
  std::vector<double> samples(static_cast<std::size_t>(width) * height * 3);
  for (double& v : samples) v = rng.uniform(lo, hi);
  return ImageBuffer(width, height, std::move(samples));
}

Mask random_mask(SplitMix64& rng, int width, int height) {
  std::vector<double> values(static_cast<std::size_t>(width) * height);
  for (double& v : values) v = rng.uniform();
  return Mask(width, height, std::move(values));
}

double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.samples().size(); ++i) {
    m = std::max(m, std::fabs(a.samples()[i] - b.samples()[i]));
  }
  return m;
}

double max_abs_diff(const Plane& a, const Plane& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::fabs(a.values()[i] - b.values()[i]));
  }
  return m;
}

Mask disk_mask(int width, int height, double cx, double cy, double r) {
  std::vector<double> values(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = x + 0.5 - cx;
      const double dy = y + 0.5 - cy;
      values[static_cast<std::size_t>(y) * width + x] = dx * dx + dy * dy <= r * r ? 1.0 : 0.0;
    }
  }
  return Mask(width, height, std::move(values));
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("blendforge_" + tag + "_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::uint64_t tree_checksum(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const fs::path& f : files) {
    for (char c : f.lexically_relative(root).generic_string()) mix(static_cast<unsigned char>(c));
    mix(0);
    for (std::uint8_t b : read_file_bytes(f)) mix(b);
  }
  return h;
}

Plane dense_poisson(const Plane& f, const Plane& b, const Mask& m) {
  const int w = f.width(), h = f.height();
  std::vector<int> index(static_cast<std::size_t>(w) * h, -1);
  std::vector<std::pair<int, int>> cells;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (m(x, y) == 1.0) {
        index[static_cast<std::size_t>(y) * w + x] = static_cast<int>(cells.size());
        cells.emplace_back(x, y);
      }
    }
  }
  const std::size_t n = cells.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
  for (std::size_t i = 0; i < n; ++i) {
    const auto [x, y] = cells[i];
    a[i][i] = 4.0;
    double rhs = 4.0 * f(x, y);
    for (int d = 0; d < 4; ++d) {
      const int nx = x + dx[d], ny = y + dy[d];
      rhs -= f(nx, ny);
      const int j = index[static_cast<std::size_t>(ny) * w + nx];
      if (j >= 0) {
        a[i][j] -= 1.0;
      } else {
        rhs += b(nx, ny);
      }
    }
    a[i][n] = rhs;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double k = a[r][c] / a[c][c];
      for (std::size_t k2 = c; k2 <= n; ++k2) a[r][k2] -= k * a[c][k2];
    }
  }
  Plane out = b;
  for (std::size_t i = 0; i < n; ++i) {
    out(cells[i].first, cells[i].second) = std::clamp(a[i][n] / a[i][i], 0.0, 1.0);
  }
  return out;
}

}  // namespace blendforge::test
