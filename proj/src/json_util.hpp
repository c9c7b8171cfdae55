#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace blendforge::detail {

/// Parses a JSON file; syntax errors become LocatedError with a line number.
nlohmann::json parse_json_file(const std::filesystem::path& path);

/// Line (1-based) of a byte offset within text.
int line_of_offset(const std::string& text, std::size_t offset);

/// Writes with a trailing newline, 2-space indent; key order is deterministic.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace blendforge::detail
