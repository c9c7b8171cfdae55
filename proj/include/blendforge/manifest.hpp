#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace blendforge {

enum class Label { Real, Fake };

std::string_view label_name(Label label) noexcept;
/// Accepts "real" / "fake" (case-insensitive).
std::optional<Label> parse_label(std::string_view text) noexcept;

struct SampleRecord {
  std::string path;  // relative to the manifest directory, or absolute
  Label label = Label::Real;
  std::string video_id;
  int frame_idx = 0;
  std::string source_tag;
  std::optional<std::uint64_t> seed;

  bool operator==(const SampleRecord&) const = default;
};

/// Dataset catalog. root is where relative record paths resolve; it is not
/// serialized.
struct Manifest {
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<SampleRecord> records;
  std::filesystem::path root;

  std::filesystem::path resolve(const SampleRecord& record) const;
  std::size_t count(Label label) const noexcept;

  /// Throws ManifestIntegrity on an empty manifest or a repeated
  /// (video_id, frame_idx) key.
  void check_keys() const;
  /// check_keys plus existence of every referenced file.
  void validate_files() const;

  nlohmann::json to_json() const;
  /// Schema errors name the offending record.
  static Manifest from_json(const nlohmann::json& doc, const std::string& origin = {});
  /// As from_json; lines[i] is the source line of record i for diagnostics.
  static Manifest from_json_with_lines(const nlohmann::json& doc,
                                       const std::string& origin,
                                       const std::vector<int>& lines);
};

/// Reads and schema-checks a manifest; root becomes the file's directory.
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Record paths rewritten so they resolve from new_root.
Manifest rebase_manifest(const Manifest& manifest, const std::filesystem::path& new_root);

}  // namespace blendforge
