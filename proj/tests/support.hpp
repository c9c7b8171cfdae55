#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "blendforge/geometry.hpp"
#include "blendforge/image.hpp"
#include "blendforge/rng.hpp"

namespace blendforge::test {

ImageBuffer random_image(SplitMix64& rng, int width, int height, double lo = 0.0,
                         double hi = 1.0);
Mask random_mask(SplitMix64& rng, int width, int height);
double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b);
double max_abs_diff(const Plane& a, const Plane& b);

/// Direct Gaussian elimination of the 5-point system over the hard region,
/// boundary values from b. Result clamped to [0, 1], bg outside.
Plane dense_poisson(const Plane& f, const Plane& b, const Mask& m);

/// Hard disk of radius r centered at (cx, cy), pixel-center test.
Mask disk_mask(int width, int height, double cx, double cy, double r);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

/// FNV-1a over relative paths and contents of every regular file, in path order.
std::uint64_t tree_checksum(const std::filesystem::path& root);

}  // namespace blendforge::test
