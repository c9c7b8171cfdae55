#include "blendforge/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "blendforge/error.hpp"
#include "json_util.hpp"

namespace blendforge {

namespace fs = std::filesystem;

std::string_view label_name(Label label) noexcept {
  return label == Label::Real ? "real" : "fake";
}

std::optional<Label> parse_label(std::string_view text) noexcept {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "real") return Label::Real;
  if (lower == "fake") return Label::Fake;
  return std::nullopt;
}

fs::path Manifest::resolve(const SampleRecord& record) const {
  const fs::path p(record.path);
  return p.is_absolute() ? p : root / p;
}

std::size_t Manifest::count(Label label) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(),
      [label](const SampleRecord& r) { return r.label == label; }));
}

void Manifest::check_keys() const {
  if (records.empty()) {
    throw Error(ErrorCode::ManifestIntegrity, "manifest has no records");
  }
  std::set<std::pair<std::string, int>> seen;
  for (const SampleRecord& r : records) {
    if (!seen.emplace(r.video_id, r.frame_idx).second) {
      throw Error(ErrorCode::ManifestIntegrity,
                  fmt::format("duplicate key (video_id={}, frame_idx={})", r.video_id,
                              r.frame_idx));
    }
  }
}

void Manifest::validate_files() const {
  check_keys();
  for (const SampleRecord& r : records) {
    const fs::path p = resolve(r);
    if (!fs::exists(p)) {
      throw LocatedError(ErrorCode::ManifestIntegrity,
                         fmt::format("referenced file does not exist: {}", p.string()),
                         p.string());
    }
  }
}

nlohmann::json Manifest::to_json() const {
  auto recs = nlohmann::json::array();
  for (const SampleRecord& r : records) {
    nlohmann::json j = {{"path", r.path},
                        {"label", label_name(r.label)},
                        {"video_id", r.video_id},
                        {"frame_idx", r.frame_idx},
                        {"source_tag", r.source_tag}};
    j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
    recs.push_back(std::move(j));
  }
  return {{"metadata", metadata}, {"records", std::move(recs)}};
}

namespace {

// Line of each element of the top-level "records" array, found with a small
// scanner since the DOM parser keeps no positions.
std::vector<int> record_lines(const std::string& text) {
  std::vector<int> lines;
  std::vector<char> stack;
  std::string last_key;
  std::string records_owner_key;
  bool in_records = false;
  int line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
    } else if (c == '"') {
      std::string s;
      for (++i; i < text.size() && text[i] != '"'; ++i) {
        if (text[i] == '\\') ++i;
        else s.push_back(text[i]);
      }
      if (stack.size() == 1 && stack.back() == '{') last_key = s;
    } else if (c == '{' || c == '[') {
      if (in_records && stack.size() == 2) lines.push_back(line);
      stack.push_back(c);
      if (c == '[' && stack.size() == 2 && last_key == "records") in_records = true;
    } else if (c == '}' || c == ']') {
      if (!stack.empty()) stack.pop_back();
      if (stack.size() < 2) in_records = false;
    }
  }
  return lines;
}

}  // namespace

Manifest Manifest::from_json(const nlohmann::json& doc, const std::string& origin) {
  return from_json_with_lines(doc, origin, {});
}

Manifest Manifest::from_json_with_lines(const nlohmann::json& doc,
                                        const std::string& origin,
                                        const std::vector<int>& lines) {
  auto fail = [&](std::size_t index, const std::string& what) -> LocatedError {
    const int line = index < lines.size() ? lines[index] : 0;
    const std::string where =
        line > 0 ? fmt::format("{}:{}", origin, line) : origin;
    return LocatedError(ErrorCode::Schema,
                        fmt::format("{}: record {}: {}", where, index, what), origin,
                        line);
  };
  if (!doc.is_object() || !doc.contains("records") || !doc["records"].is_array()) {
    throw LocatedError(ErrorCode::Schema,
                       fmt::format("{}: expected an object with a \"records\" array",
                                   origin),
                       origin);
  }
  Manifest m;
  if (doc.contains("metadata")) {
    if (!doc["metadata"].is_object()) {
      throw LocatedError(ErrorCode::Schema,
                         fmt::format("{}: \"metadata\" must be an object", origin),
                         origin);
    }
    m.metadata = doc["metadata"];
  }
  const auto& recs = doc["records"];
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& j = recs[i];
    if (!j.is_object()) throw fail(i, "expected an object");
    SampleRecord r;
    if (!j.contains("path") || !j["path"].is_string()) throw fail(i, "missing string \"path\"");
    r.path = j["path"].get<std::string>();
    if (!j.contains("label") || !j["label"].is_string()) {
      throw fail(i, "missing string \"label\"");
    }
    const auto label = parse_label(j["label"].get<std::string>());
    if (!label) throw fail(i, "label must be \"real\" or \"fake\"");
    r.label = *label;
    if (!j.contains("video_id") || !j["video_id"].is_string()) {
      throw fail(i, "missing string \"video_id\"");
    }
    r.video_id = j["video_id"].get<std::string>();
    if (!j.contains("frame_idx") || !j["frame_idx"].is_number_integer() ||
        j["frame_idx"].get<long long>() < 0) {
      throw fail(i, "\"frame_idx\" must be a non-negative integer");
    }
    r.frame_idx = j["frame_idx"].get<int>();
    if (j.contains("source_tag")) {
      if (!j["source_tag"].is_string()) throw fail(i, "\"source_tag\" must be a string");
      r.source_tag = j["source_tag"].get<std::string>();
    }
    if (j.contains("seed") && !j["seed"].is_null()) {
      if (!j["seed"].is_number_unsigned()) throw fail(i, "\"seed\" must be an unsigned integer");
      r.seed = j["seed"].get<std::uint64_t>();
    }
    m.records.push_back(std::move(r));
  }
  return m;
}

Manifest load_manifest(const fs::path& path) {
  const auto doc = detail::parse_json_file(path);
  std::ifstream in(path, std::ios::binary);
  std::stringstream text;
  text << in.rdbuf();
  Manifest m = Manifest::from_json_with_lines(doc, path.string(), record_lines(text.str()));
  m.root = path.parent_path();
  return m;
}

void save_manifest(const fs::path& path, const Manifest& manifest) {
  detail::write_json_file(path, manifest.to_json());
}

Manifest rebase_manifest(const Manifest& manifest, const fs::path& new_root) {
  Manifest out = manifest;
  out.root = new_root;
  for (SampleRecord& r : out.records) {
    const fs::path p(r.path);
    if (p.is_absolute()) continue;
    const fs::path abs = fs::weakly_canonical(fs::absolute(manifest.root / p));
    const fs::path base = fs::weakly_canonical(fs::absolute(new_root));
    r.path = abs.lexically_relative(base).generic_string();
  }
  return out;
}

}  // namespace blendforge
