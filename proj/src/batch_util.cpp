#include "batch_util.hpp"

#include <cctype>
#include <filesystem>

#include <fmt/format.h>

namespace blendforge::detail {

std::string sample_name(std::size_t k, const SampleRecord& record) {
  std::string safe;
  for (char c : record.video_id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
    safe.push_back(ok ? c : '_');
  }
  return fmt::format("{:06d}_{}_{}", k, safe, record.frame_idx);
}

std::optional<LandmarkSet> find_landmarks(const LandmarkIndex& index,
                                          const SampleRecord& record) {
  const std::string file = std::filesystem::path(record.path).filename().string();
  if (auto it = index.find(file); it != index.end()) return it->second;
  if (auto it = index.find(record.path); it != index.end()) return it->second;
  return std::nullopt;
}

PreparedFrame prepare_frame(const ImageBuffer& frame, const LandmarkSet& landmarks,
                            const BatchOptions& options) {
  landmarks.validate();
  if (!options.crop) return {frame, landmarks, nullptr};
  FaceCrop crop = crop_face(frame, landmarks, options.crop_margin, options.crop_size);
  nlohmann::json window = {{"x0", crop.window.x0},
                           {"y0", crop.window.y0},
                           {"x1", crop.window.x1},
                           {"y1", crop.window.y1}};
  return {std::move(crop.image), std::move(crop.landmarks), window};
}

nlohmann::json crop_options_json(const BatchOptions& options) {
  if (!options.crop) return {{"enabled", false}};
  return {{"enabled", true}, {"margin", options.crop_margin}, {"size", options.crop_size}};
}

}  // namespace blendforge::detail
