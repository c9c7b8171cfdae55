#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "blendforge/geometry.hpp"
#include "blendforge/manifest.hpp"
#include "blendforge/sbi.hpp"

namespace blendforge::detail {

/// Output file stem for the k-th processed record: zero-padded index plus a
/// filesystem-safe video id and frame number.
std::string sample_name(std::size_t k, const SampleRecord& record);

/// Landmarks keyed by the record's file name (or its full path).
std::optional<LandmarkSet> find_landmarks(const LandmarkIndex& index,
                                          const SampleRecord& record);

struct PreparedFrame {
  ImageBuffer image;
  LandmarkSet landmarks;
  nlohmann::json crop_json;
};

PreparedFrame prepare_frame(const ImageBuffer& frame, const LandmarkSet& landmarks,
                            const BatchOptions& options);

nlohmann::json crop_options_json(const BatchOptions& options);

}  // namespace blendforge::detail
