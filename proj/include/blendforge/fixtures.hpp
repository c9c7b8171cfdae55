#pragma once

#include <cstdint>
#include <filesystem>

#include "blendforge/geometry.hpp"
#include "blendforge/image.hpp"
#include "blendforge/manifest.hpp"

namespace blendforge {

/// A procedurally drawn frame: textured background, shaded elliptical face
/// with eyes, brows and mouth, sensor-like noise, and a 68-point landmark
/// layout (jaw, brows, nose, eyes, mouth).
struct SyntheticFrame {
  ImageBuffer image;
  LandmarkSet landmarks;
};

/// frame_idx perturbs face position and noise while keeping the scene.
SyntheticFrame synthesize_face_frame(std::uint64_t scene_seed, int frame_idx = 0,
                                     int width = 256, int height = 256);

struct FixtureCorpus {
  Manifest manifest;
  LandmarkIndex landmarks;
};

/// Writes frames/<video>_<frame>.png, landmarks.json and manifest.json (all
/// records real) into dir.
FixtureCorpus write_fixture_corpus(const std::filesystem::path& dir, int videos,
                                   int frames_per_video, std::uint64_t seed,
                                   int width = 256, int height = 256);

}  // namespace blendforge
